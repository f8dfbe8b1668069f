"""Spatio-temporal denoising by split-variable ADMM.

The objective over a stack of K registered log-domain frames g^(k) is

    sum_k rho(f - g^(k)) + mu * TV(f) + lam * ||f - Q(f)||_1

with rho the Huber loss, TV the anisotropic total variation, and Q the
sliding-window quantile filter. Both L1 terms are split off via auxiliary
variables (u for the quantile term, v for the gradient) with Bregman
variables b_u, b_v and quadratic couplings weighted alpha and beta.

Each outer iteration re-linearizes Q at the current estimate; each inner
iteration solves the quadratic f-subproblem by matrix-free conjugate
gradients (with Huber residuals handled through one reweighting per
solve), then applies the closed-form shrinkage and Bregman updates. A
prior weight of exactly zero removes the corresponding coupling term from
the linear system, so e.g. lam = 0 runs are pure TV denoising, untouched
by any quantile-branch setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .diff_ops import GradientField, grad_adjoint_arrays, grad_arrays, tv_value
from .errors import InvalidInputError, NumericError
from .image_core import BScanStack, Domain, Image2D
from .quantile_prior import (
    QuantileConfig,
    QuantileLinearization,
    assemble_linearization,
    gather,
    prior_value,
    scatter_add,
)
from .robust_loss import HuberParams, huber_value, irls_weight


@dataclass(frozen=True)
class SolverConfig:
    """All weights, iteration counts, and sub-solver knobs.

    ``mu`` weights the TV term and ``lam`` the quantile prior; ``alpha``
    and ``beta`` are the corresponding constraint multipliers, required
    positive whenever their prior weight is positive. ``k_scaling``
    records whether the weights were scaled by the stack size (see
    :func:`default_config`).
    """

    mu: float
    lam: float
    alpha: float
    beta: float
    t_outer: int = 20
    t_inner: int = 2
    cg_max_iters: int = 100
    cg_tolerance: float = 1e-6
    huber: HuberParams = HuberParams()
    quantile: QuantileConfig = QuantileConfig()
    k_scaling: bool = True

    def __post_init__(self) -> None:
        for name in ("mu", "lam", "alpha", "beta"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0.0):
                raise InvalidInputError(f"{name} must be a nonnegative finite number")
        if self.lam > 0.0 and self.alpha <= 0.0:
            raise InvalidInputError("alpha must be positive when lam > 0")
        if self.mu > 0.0 and self.beta <= 0.0:
            raise InvalidInputError("beta must be positive when mu > 0")
        if self.t_outer < 1 or self.t_inner < 1:
            raise InvalidInputError("iteration counts must be positive")
        if self.cg_max_iters < 1:
            raise InvalidInputError("cg_max_iters must be positive")
        if not (np.isfinite(self.cg_tolerance) and self.cg_tolerance > 0.0):
            raise InvalidInputError("cg_tolerance must be positive")


@dataclass
class SolverState:
    """Evolving solver context: estimate, auxiliaries, and diagnostics."""

    f: Image2D
    u: Image2D
    v: GradientField
    b_u: Image2D
    b_v: GradientField
    linearization: QuantileLinearization
    outer_iter: int = 0
    inner_iter: int = 0
    energy_trace: list[float] = field(default_factory=list)
    cg_iterations: list[int] = field(default_factory=list)


def default_config(k: int, k_scaling: bool = True) -> SolverConfig:
    """Stock parameters for a K-frame stack.

    The prior weights and multipliers scale linearly with K so the
    regularization keeps pace with the growing data term; iteration
    counts and the window do not scale.
    """
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    scale = float(k) if k_scaling else 1.0
    return SolverConfig(
        mu=0.075 * scale,
        lam=5.0 * scale,
        alpha=100.0 * scale,
        beta=1.5 * scale,
        k_scaling=k_scaling,
    )


def energy(f: Image2D, stack: BScanStack, cfg: SolverConfig) -> float:
    """Objective value at f: Huber data term plus both weighted priors."""
    if stack.domain is not Domain.LOG:
        raise InvalidInputError("energy expects a log-domain stack")
    if f.shape != stack.shape:
        raise InvalidInputError(f"estimate shape {f.shape} does not match stack {stack.shape}")
    total = 0.0
    for frame in stack.frames:
        total += float(np.sum(huber_value(f.data - frame.data, cfg.huber)))
    if cfg.mu > 0.0:
        total += cfg.mu * tv_value(f)
    if cfg.lam > 0.0:
        total += cfg.lam * prior_value(f, cfg.quantile)
    return total


def shrink(z, gamma: float):
    """Soft-threshold z toward zero by gamma: sign(z) * max(|z| - gamma, 0)."""
    if gamma < 0.0:
        raise InvalidInputError("shrink threshold must be nonnegative")
    arr = np.asarray(z, dtype=np.float64)
    out = np.sign(arr) * np.maximum(np.abs(arr) - gamma, 0.0)
    return float(out) if arr.ndim == 0 else out


def conjugate_gradient(
    operator: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    x0: np.ndarray,
    tol: float,
    max_iters: int,
) -> tuple[np.ndarray, int]:
    """Solve operator(x) = rhs for an SPD operator, warm-started at x0.

    Terminates when the residual norm drops below ``tol`` times the
    right-hand-side norm, or after ``max_iters`` iterations. Returns the
    iterate and the number of iterations performed.
    """
    b_norm = float(np.linalg.norm(rhs))
    if b_norm == 0.0:
        return np.zeros_like(rhs), 0
    x = np.array(x0, dtype=np.float64)
    r = rhs - operator(x)
    p = r.copy()
    rr = float(np.vdot(r, r))
    for it in range(max_iters):
        if not np.isfinite(rr):
            raise NumericError(f"CG residual became non-finite at iteration {it}")
        if math.sqrt(rr) <= tol * b_norm:
            return x, it
        ap = operator(p)
        p_ap = float(np.vdot(p, ap))
        if not np.isfinite(p_ap) or p_ap <= 0.0:
            raise NumericError(f"CG curvature {p_ap!r} at iteration {it}; operator not SPD?")
        step = rr / p_ap
        x += step * p
        r -= step * ap
        rr_next = float(np.vdot(r, r))
        p *= rr_next / rr
        p += r
        rr = rr_next
    return x, max_iters


def system_operator(
    weight_sum: np.ndarray,
    linearization: QuantileLinearization | None,
    alpha: float,
    beta: float,
) -> Callable[[np.ndarray], np.ndarray]:
    """Matrix-free normal-equations operator of the f-subproblem.

    Applies 2 * diag(weight_sum) plus, when enabled, the quantile
    coupling alpha * (I - Q)^T (I - Q) and the gradient coupling
    beta * grad^T grad. Pass ``linearization=None`` or a zero weight to
    drop a term.
    """

    def apply(x: np.ndarray) -> np.ndarray:
        out = 2.0 * weight_sum * x
        if linearization is not None and alpha > 0.0:
            y = x - gather(linearization, x)
            out += alpha * (y - scatter_add(linearization, y))
        if beta > 0.0:
            gx, gy = grad_arrays(x)
            out += beta * grad_adjoint_arrays(gx, gy)
        return out

    return apply


def _data_weights(
    f_prev: np.ndarray, frames: np.ndarray, huber: HuberParams
) -> tuple[np.ndarray, np.ndarray]:
    weight_sum = np.zeros_like(f_prev)
    weighted_frames = np.zeros_like(f_prev)
    for g in frames:
        w = irls_weight(f_prev, g, huber)
        weight_sum += w
        weighted_frames += w * g
    return weight_sum, weighted_frames


def solve_f_update(state: SolverState, stack: BScanStack, cfg: SolverConfig) -> Image2D:
    """One reweighted quadratic solve for the estimate.

    Huber weights come from the current ``state.f``; the linear system is
    then solved by warm-started CG. The CG iteration count is appended to
    ``state.cg_iterations``.
    """
    f_prev = state.f.data
    weight_sum, weighted_frames = _data_weights(f_prev, stack.as_array(), cfg.huber)
    rhs = 2.0 * weighted_frames

    use_quantile = cfg.lam > 0.0
    use_tv = cfg.mu > 0.0
    if use_quantile:
        y = state.u.data - state.b_u.data
        rhs += cfg.alpha * (y - scatter_add(state.linearization, y))
    if use_tv:
        rhs += cfg.beta * grad_adjoint_arrays(
            state.v.gx.data - state.b_v.gx.data,
            state.v.gy.data - state.b_v.gy.data,
        )

    operator = system_operator(
        weight_sum,
        state.linearization if use_quantile else None,
        cfg.alpha if use_quantile else 0.0,
        cfg.beta if use_tv else 0.0,
    )
    solution, iters = conjugate_gradient(
        operator, rhs, f_prev, cfg.cg_tolerance, cfg.cg_max_iters
    )
    if not np.isfinite(solution).all():
        raise NumericError(
            f"non-finite estimate after CG (outer {state.outer_iter}, inner {state.inner_iter})"
        )
    state.cg_iterations.append(iters)
    return Image2D(solution)


def update_auxiliaries(state: SolverState, cfg: SolverConfig) -> tuple[Image2D, GradientField]:
    """Shrinkage updates for both split variables.

    u absorbs the quantile-prior residual f - Qf + b_u at threshold
    lam / alpha; v absorbs grad f + b_v at threshold mu / beta, each
    gradient component independently.
    """
    f = state.f.data
    qf = gather(state.linearization, f)
    threshold_u = cfg.lam / cfg.alpha if cfg.alpha > 0.0 else 0.0
    u = shrink(f - qf + state.b_u.data, threshold_u)
    gx, gy = grad_arrays(f)
    threshold_v = cfg.mu / cfg.beta if cfg.beta > 0.0 else 0.0
    v = GradientField(
        Image2D(shrink(gx + state.b_v.gx.data, threshold_v)),
        Image2D(shrink(gy + state.b_v.gy.data, threshold_v)),
    )
    return Image2D(u), v


def update_bregman(state: SolverState) -> tuple[Image2D, GradientField]:
    """Accumulate the constraint residuals into the Bregman variables."""
    f = state.f.data
    qf = gather(state.linearization, f)
    b_u = state.b_u.data + (f - qf - state.u.data)
    gx, gy = grad_arrays(f)
    b_v = GradientField(
        Image2D(state.b_v.gx.data + (gx - state.v.gx.data)),
        Image2D(state.b_v.gy.data + (gy - state.v.gy.data)),
    )
    return Image2D(b_u), b_v


def denoise(stack: BScanStack, cfg: SolverConfig) -> tuple[Image2D, SolverState]:
    """Run the full alternating scheme on a log-domain stack.

    Starts from the pixelwise frame mean with all auxiliaries zero, then
    performs ``t_outer`` outer iterations (each re-assembling the
    quantile linearization from the current estimate) of ``t_inner``
    inner iterations (f-solve, shrinkage, Bregman update). The energy is
    recorded once for the initial guess and once per inner iteration.
    """
    if stack.domain is not Domain.LOG:
        raise InvalidInputError("denoise expects a log-domain stack")
    shape = stack.shape
    initial = Image2D(stack.as_array().mean(axis=0))
    zero = Image2D(np.zeros(shape))
    zero_field = GradientField(zero, zero)
    state = SolverState(
        f=initial,
        u=zero,
        v=zero_field,
        b_u=zero,
        b_v=zero_field,
        linearization=assemble_linearization(initial, cfg.quantile),
    )
    state.energy_trace.append(energy(state.f, stack, cfg))
    for _ in range(cfg.t_outer):
        state.linearization = assemble_linearization(state.f, cfg.quantile)
        for _ in range(cfg.t_inner):
            state.f = solve_f_update(state, stack, cfg)
            state.u, state.v = update_auxiliaries(state, cfg)
            state.b_u, state.b_v = update_bregman(state)
            state.inner_iter += 1
            state.energy_trace.append(energy(state.f, stack, cfg))
        state.outer_iter += 1
    return state.f, state


def tv_only_config(cfg: SolverConfig) -> SolverConfig:
    """The same configuration with the quantile prior switched off."""
    return replace(cfg, lam=0.0)
