"""Image quality metrics: PSNR / SSIM against a reference, MSR / CNR from
manually selected regions.

PSNR and SSIM are meant for linear-domain images normalized to [0, 1]
(peak defaults to 1.0); MSR and CNR are typically evaluated on the
displayed log intensities. The functions themselves are domain-agnostic,
the pipeline picks what to feed them.

Region files are plain text, one region per line::

    fg x y w h
    bg x y w h

with exactly one ``bg`` line. Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.signal import convolve2d

from .errors import DataIOError, InvalidInputError
from .image_core import Image2D

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


class Region(NamedTuple):
    """Axis-aligned rectangle: top-left corner (x, y), size (w, h)."""

    x: int
    y: int
    w: int
    h: int


@dataclass(frozen=True)
class RegionSet:
    foreground: tuple[Region, ...]
    background: Region

    def __post_init__(self) -> None:
        foreground = tuple(Region(*r) for r in self.foreground)
        if not foreground:
            raise InvalidInputError("at least one foreground region is required")
        for region in (*foreground, Region(*self.background)):
            if region.w < 1 or region.h < 1 or region.x < 0 or region.y < 0:
                raise InvalidInputError(f"degenerate region {region}")
        object.__setattr__(self, "foreground", foreground)
        object.__setattr__(self, "background", Region(*self.background))


def _region_values(image: Image2D, region: Region) -> np.ndarray:
    if region.x + region.w > image.width or region.y + region.h > image.height:
        raise InvalidInputError(f"region {region} exceeds image bounds {image.shape}")
    return image.data[region.y : region.y + region.h, region.x : region.x + region.w]


def _check_pair(test: Image2D, reference: Image2D) -> None:
    if test.shape != reference.shape:
        raise InvalidInputError(
            f"image shapes differ: {test.shape} vs {reference.shape}"
        )


def psnr(test: Image2D, reference: Image2D, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical images."""
    _check_pair(test, reference)
    if not peak > 0:
        raise InvalidInputError("peak must be positive")
    mse = float(np.mean((test.data - reference.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-0.5 * (offsets / sigma) ** 2)
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(test: Image2D, reference: Image2D, peak: float = 1.0) -> float:
    """Mean structural similarity over valid Gaussian windows.

    Local statistics use the standard 11x11 Gaussian window with sigma
    1.5 and stabilizers C1 = (0.01 * peak)^2, C2 = (0.03 * peak)^2. Only
    windows fully inside the image contribute, so both images must be at
    least 11x11.
    """
    _check_pair(test, reference)
    if not peak > 0:
        raise InvalidInputError("peak must be positive")
    if min(test.shape) < SSIM_WINDOW:
        raise InvalidInputError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM"
        )
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    x = test.data
    y = reference.data

    def smooth(a: np.ndarray) -> np.ndarray:
        return convolve2d(a, kernel, mode="valid")

    mx = smooth(x)
    my = smooth(y)
    vx = smooth(x * x) - mx * mx
    vy = smooth(y * y) - my * my
    cxy = smooth(x * y) - mx * my
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    score = ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / (
        (mx * mx + my * my + c1) * (vx + vy + c2)
    )
    return float(score.mean())


def msr(image: Image2D, regions: RegionSet) -> float:
    """Mean-to-standard-deviation ratio averaged over foreground regions.

    Population (divide-by-n) standard deviation; a zero-variance region
    yields +inf.
    """
    ratios = []
    for region in regions.foreground:
        values = _region_values(image, region)
        sd = float(values.std())
        ratios.append(float(values.mean()) / sd if sd > 0.0 else math.inf)
    return float(np.mean(ratios))


def cnr(image: Image2D, regions: RegionSet) -> float:
    """Contrast-to-noise ratio of each foreground region against the
    background, averaged: |mu_f - mu_b| / sqrt(0.5 * (var_f + var_b)).

    Returns +inf when both variances vanish.
    """
    background = _region_values(image, regions.background)
    mu_b = float(background.mean())
    var_b = float(background.var())
    ratios = []
    for region in regions.foreground:
        values = _region_values(image, region)
        denom = math.sqrt(0.5 * (float(values.var()) + var_b))
        if denom == 0.0:
            ratios.append(math.inf)
        else:
            ratios.append(abs(float(values.mean()) - mu_b) / denom)
    return float(np.mean(ratios))


def load_regions(path: str | Path) -> RegionSet:
    """Parse a region sidecar file (format documented in the module docstring)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataIOError(f"cannot read region file {path}: {exc}") from exc
    foreground: list[Region] = []
    background: Region | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5 or parts[0] not in ("fg", "bg"):
            raise DataIOError(f"{path}:{lineno}: expected 'fg|bg x y w h', got {raw!r}")
        try:
            region = Region(*(int(p) for p in parts[1:]))
        except ValueError as exc:
            raise DataIOError(f"{path}:{lineno}: non-integer region field") from exc
        if parts[0] == "fg":
            foreground.append(region)
        elif background is not None:
            raise DataIOError(f"{path}:{lineno}: more than one background region")
        else:
            background = region
    if background is None:
        raise DataIOError(f"{path}: missing background region")
    try:
        return RegionSet(tuple(foreground), background)
    except InvalidInputError as exc:
        raise DataIOError(f"{path}: {exc}") from exc
