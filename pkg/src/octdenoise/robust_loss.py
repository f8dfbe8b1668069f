"""Huber loss, its derivative, and the diagonal reweighting it induces.

The loss is quadratic (r^2 / 2) up to the threshold delta and linear
beyond it, so its derivative is r inside and delta * sign(r) outside.
Reweighted least squares replaces the loss by a weighted quadratic with
weight rho'(r) / r, which is 1 in the quadratic region (including the
r -> 0 limit) and delta / |r| in the linear one. Weights therefore live
in (0, 1] and residuals from misregistered or outlier frames are damped
instead of dominating the fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

#: Default transition threshold, in log-intensity units of images that were
#: normalized to [0, 1] before the log transform.
DEFAULT_HUBER_DELTA = 0.05


@dataclass(frozen=True)
class HuberParams:
    delta: float = DEFAULT_HUBER_DELTA

    def __post_init__(self) -> None:
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise InvalidInputError("huber delta must be positive and finite")


def _as_input(r) -> tuple[np.ndarray, bool]:
    arr = np.asarray(r, dtype=np.float64)
    return arr, arr.ndim == 0


def huber_value(r, params: HuberParams):
    """Evaluate the loss elementwise; scalar in, scalar out."""
    arr, scalar = _as_input(r)
    d = params.delta
    absr = np.abs(arr)
    out = np.where(absr <= d, 0.5 * arr * arr, d * absr - 0.5 * d * d)
    return float(out) if scalar else out


def huber_derivative(r, params: HuberParams):
    """Derivative of the loss: r inside the threshold, +-delta outside."""
    arr, scalar = _as_input(r)
    d = params.delta
    out = np.where(np.abs(arr) <= d, arr, d * np.sign(arr))
    return float(out) if scalar else out


def irls_weight(f_prev, g, params: HuberParams):
    """Reweighting factor rho'(r) / r at r = f_prev - g.

    Exactly 1 for |r| <= delta (the r = 0 limit included), delta / |r|
    otherwise.
    """
    arr, scalar = _as_input(np.asarray(f_prev, dtype=np.float64) - np.asarray(g, dtype=np.float64))
    d = params.delta
    absr = np.abs(arr)
    # the clamp keeps the masked-out branch free of divisions by zero
    out = np.where(absr <= d, 1.0, d / np.maximum(absr, d))
    return float(out) if scalar else out
