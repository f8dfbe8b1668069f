"""Forward-difference image gradient, its adjoint, and anisotropic TV.

The stencil is gx[i, j] = f[i, j+1] - f[i, j] with the last column zero
(and the analogous rows for gy), i.e. Neumann boundary conditions. The
adjoint is the matching negative divergence, so <grad f, g> == <f, adj g>
holds exactly and constants are in the null space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .image_core import Image2D


@dataclass(frozen=True)
class GradientField:
    """Horizontal and vertical difference images of a common source."""

    gx: Image2D
    gy: Image2D

    def __post_init__(self) -> None:
        if self.gx.shape != self.gy.shape:
            raise InvalidInputError(
                f"gradient components disagree: {self.gx.shape} vs {self.gy.shape}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.gx.shape


def grad_arrays(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = np.zeros_like(a)
    gx[:, :-1] = a[:, 1:] - a[:, :-1]
    gy = np.zeros_like(a)
    gy[:-1, :] = a[1:, :] - a[:-1, :]
    return gx, gy


def grad_adjoint_arrays(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    if gx.shape != gy.shape:
        raise InvalidInputError("gradient components must share a shape")
    out = np.zeros_like(gx)
    out[:, :-1] -= gx[:, :-1]
    out[:, 1:] += gx[:, :-1]
    out[:-1, :] -= gy[:-1, :]
    out[1:, :] += gy[:-1, :]
    return out


def gradient(f: Image2D) -> GradientField:
    """Forward differences along columns (gx) and rows (gy)."""
    gx, gy = grad_arrays(f.data)
    return GradientField(Image2D(gx), Image2D(gy))


def gradient_adjoint(g: GradientField) -> Image2D:
    """Adjoint of :func:`gradient` (negative divergence)."""
    return Image2D(grad_adjoint_arrays(g.gx.data, g.gy.data))


def tv_value(f: Image2D) -> float:
    """Anisotropic total variation: sum of |gx| plus sum of |gy|."""
    gx, gy = grad_arrays(f.data)
    return float(np.abs(gx).sum() + np.abs(gy).sum())
