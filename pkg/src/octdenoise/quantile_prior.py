"""Sliding-window quantile filtering and its fixed-point linearization.

The regularizer used by the solver penalizes the L1 distance between an
image and its quantile-filtered version (the 3x3 median by default). For
the quadratic subproblems the nonlinear filter is replaced by a binary
row-stochastic gather matrix: row i has a single 1 at the flat index of
the window element that realizes the quantile at pixel i. Assembled from
image f, the matrix reproduces the filter exactly when applied to f
itself, and approximates it for nearby images.

Conventions (the filter and the linearization must agree on them):

* the quantile of n sorted window values is the order statistic with
  0-based rank round(p * (n - 1)), rounding halves up;
* windows use replicate padding, and a selected padded element maps back
  to its in-bounds source pixel;
* value ties are broken toward the smallest flat source index.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidInputError
from .image_core import Image2D


class Boundary(Enum):
    REPLICATE = "replicate"


@dataclass(frozen=True)
class QuantileConfig:
    """Quantile parameter p in [0, 1] and odd window side length."""

    p: float = 0.5
    window: int = 3
    boundary: Boundary = Boundary.REPLICATE

    def __post_init__(self) -> None:
        if not (np.isfinite(self.p) and 0.0 <= self.p <= 1.0):
            raise InvalidInputError("quantile parameter p must lie in [0, 1]")
        if self.window < 1 or self.window % 2 == 0:
            raise InvalidInputError("window must be an odd positive integer")
        if not isinstance(self.boundary, Boundary):
            raise InvalidInputError(f"unknown boundary mode: {self.boundary!r}")


@dataclass(frozen=True)
class QuantileLinearization:
    """Compressed binary gather matrix: one source pixel per output pixel.

    ``source[i]`` is the flat index of the window element selected for
    pixel i, so applying the matrix is a gather and applying its
    transpose is a scatter-add.
    """

    source: np.ndarray
    shape: tuple[int, int]

    def __post_init__(self) -> None:
        src = np.array(self.source, dtype=np.int64)
        n = int(self.shape[0]) * int(self.shape[1])
        if src.ndim != 1 or src.size != n:
            raise InvalidInputError(
                f"source must be a flat array of length {n}, got shape {src.shape}"
            )
        if src.size and (src.min() < 0 or src.max() >= n):
            raise InvalidInputError("source positions out of range")
        src.setflags(write=False)
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "shape", (int(self.shape[0]), int(self.shape[1])))

    @property
    def n_pixels(self) -> int:
        return self.source.size

    def _check(self, x: Image2D) -> None:
        if x.shape != self.shape:
            raise InvalidInputError(
                f"image shape {x.shape} does not match linearization shape {self.shape}"
            )

    def apply(self, x: Image2D) -> Image2D:
        """Gather: output[i] = x[source[i]]."""
        self._check(x)
        return Image2D(gather(self, x.data))

    def apply_transpose(self, x: Image2D) -> Image2D:
        """Scatter-add: output[j] = sum of x[i] over all i with source[i] == j."""
        self._check(x)
        return Image2D(scatter_add(self, x.data))


def gather(lin: QuantileLinearization, values: np.ndarray) -> np.ndarray:
    return values.ravel()[lin.source].reshape(lin.shape)


def scatter_add(lin: QuantileLinearization, values: np.ndarray) -> np.ndarray:
    out = np.bincount(lin.source, weights=values.ravel(), minlength=lin.n_pixels)
    return out.reshape(lin.shape)


def _rank(p: float, n: int) -> int:
    # round-half-up keeps the rank deterministic for p values like 0.25 on
    # even n-1; for odd n and p = 0.5 this is the exact median position
    return int(np.floor(p * (n - 1) + 0.5))


def _window_values(f: Image2D, window: int) -> np.ndarray:
    r = window // 2
    padded = np.pad(f.data, r, mode="edge")
    view = sliding_window_view(padded, (window, window))
    return view.reshape(f.n_pixels, window * window)


def _window_sources(f: Image2D, window: int) -> np.ndarray:
    r = window // 2
    flat = np.arange(f.n_pixels, dtype=np.int64).reshape(f.shape)
    padded = np.pad(flat, r, mode="edge")
    view = sliding_window_view(padded, (window, window))
    return view.reshape(f.n_pixels, window * window)


def quantile_filter(f: Image2D, cfg: QuantileConfig) -> Image2D:
    """Per-pixel p-quantile over the centered window, replicate-padded.

    For p = 0.5 (odd element count) this is the exact median filter;
    p = 0 and p = 1 give the window minimum and maximum.
    """
    vals = _window_values(f, cfg.window)
    k = _rank(cfg.p, vals.shape[1])
    out = np.partition(vals, k, axis=1)[:, k]
    return Image2D(out.reshape(f.shape))


def assemble_linearization(f: Image2D, cfg: QuantileConfig) -> QuantileLinearization:
    """Record, for every pixel, which window element realizes its quantile.

    The resulting gather reproduces ``quantile_filter(f, cfg)`` exactly
    when applied to ``f``. Among equal-valued candidates the smallest
    flat index wins, which makes the assembly deterministic.
    """
    vals = _window_values(f, cfg.window)
    idxs = _window_sources(f, cfg.window)
    k = _rank(cfg.p, vals.shape[1])
    qv = np.partition(vals, k, axis=1)[:, k]
    candidates = np.where(vals == qv[:, None], idxs, np.iinfo(np.int64).max)
    return QuantileLinearization(source=candidates.min(axis=1), shape=f.shape)


def prior_value(f: Image2D, cfg: QuantileConfig) -> float:
    """L1 distance between an image and its quantile-filtered version."""
    filtered = quantile_filter(f, cfg)
    return float(np.abs(f.data - filtered.data).sum())
