"""End-to-end jobs: load or synthesize a stack, register, denoise in the
log domain, save the result, and report metrics.

A job report is a flat dict of JSON-friendly values (energy trace,
iteration counts, wall time, requested metrics). Reports are
deterministic for fixed inputs and configuration, except for the
``wall_time_s`` field.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .admm_solver import SolverConfig, default_config, denoise
from .errors import InvalidInputError
from .image_core import (
    BScanStack,
    Domain,
    Image2D,
    PhantomSpec,
    DEFAULT_INTENSITY_FLOOR,
    exp_image,
    generate_phantom,
    log_image,
    to_log,
)
from .image_io import load_image, save_image
from .metrics import cnr, load_regions, msr, psnr, ssim, SSIM_WINDOW
from .quantile_prior import QuantileConfig
from .registration import DEFAULT_SEARCH, register_stack
from .robust_loss import HuberParams


class Registration(Enum):
    NONE = "none"
    CROSS_CORRELATION = "cross-correlation"


#: SolverConfig fields that may be overridden directly by jobs / CLI flags.
_SCALAR_OVERRIDES = frozenset(
    {"mu", "lam", "alpha", "beta", "t_outer", "t_inner", "cg_max_iters", "cg_tolerance"}
)


@dataclass(frozen=True)
class JobConfig:
    """Everything one denoising run needs.

    Exactly one of ``inputs`` (image files) or ``phantom`` (synthetic
    stack) must be provided. ``solver_overrides`` may contain any of the
    scalar solver fields plus ``huber_delta``, ``window`` and
    ``quantile_p``; overrides are absolute values, applied after K
    scaling.
    """

    inputs: tuple[str, ...] = ()
    output: str | None = None
    k: int | None = None
    registration: Registration = Registration.CROSS_CORRELATION
    search: int = DEFAULT_SEARCH
    floor: float = DEFAULT_INTENSITY_FLOOR
    k_scaling: bool = True
    solver_overrides: Mapping[str, Any] = field(default_factory=dict)
    reference: str | None = None
    regions: str | None = None
    metrics_domain: str = "log"
    phantom: PhantomSpec | None = None
    save_clean: str | None = None
    save_noisy: str | None = None
    report_path: str | None = None
    output_bit_depth: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
        object.__setattr__(self, "solver_overrides", dict(self.solver_overrides))
        if (self.phantom is None) == (not self.inputs):
            raise InvalidInputError("provide either input paths or a phantom spec")
        if self.phantom is not None and self.k is None:
            raise InvalidInputError("phantom mode needs an explicit frame count k")
        if self.k is not None:
            if self.k < 1:
                raise InvalidInputError("k must be >= 1")
            if self.inputs and self.k > len(self.inputs):
                raise InvalidInputError(
                    f"k = {self.k} exceeds the {len(self.inputs)} provided inputs"
                )
        if self.metrics_domain not in ("log", "linear"):
            raise InvalidInputError("metrics_domain must be 'log' or 'linear'")
        unknown = set(self.solver_overrides) - _SCALAR_OVERRIDES - {
            "huber_delta",
            "window",
            "quantile_p",
        }
        if unknown:
            raise InvalidInputError(f"unknown solver overrides: {sorted(unknown)}")


def build_solver_config(k: int, overrides: Mapping[str, Any], k_scaling: bool = True) -> SolverConfig:
    """Stock K-frame configuration with job overrides applied on top."""
    cfg = default_config(k, k_scaling=k_scaling)
    kwargs: dict[str, Any] = {}
    for key, value in overrides.items():
        if key in _SCALAR_OVERRIDES:
            kwargs[key] = value
        elif key == "huber_delta":
            kwargs["huber"] = HuberParams(float(value))
    if "window" in overrides or "quantile_p" in overrides:
        kwargs["quantile"] = QuantileConfig(
            p=float(overrides.get("quantile_p", cfg.quantile.p)),
            window=int(overrides.get("window", cfg.quantile.window)),
        )
    return replace(cfg, **kwargs)


def _load_stack(cfg: JobConfig) -> tuple[Image2D | None, BScanStack]:
    if cfg.phantom is not None:
        return generate_phantom(cfg.phantom, cfg.k)
    paths = cfg.inputs[: cfg.k] if cfg.k is not None else cfg.inputs
    frames = tuple(load_image(p) for p in paths)
    return None, BScanStack(frames, Domain.LINEAR)


def _metric_image(image: Image2D, domain: str, floor: float) -> Image2D:
    return log_image(image, floor) if domain == "log" else image


def jsonable(value: Any) -> Any:
    """Make a report value JSON-safe (non-finite floats become strings)."""
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    return value


def format_report(report: Mapping[str, Any]) -> str:
    return json.dumps(jsonable(dict(report)), indent=2)


def run_job(cfg: JobConfig) -> dict[str, Any]:
    """Execute the full pipeline and return the report dict."""
    start = time.perf_counter()
    clean, stack = _load_stack(cfg)

    shifts = [(0, 0)] * stack.k
    if cfg.registration is Registration.CROSS_CORRELATION and stack.k >= 2:
        stack, shifts = register_stack(stack, cfg.search)

    solver_cfg = build_solver_config(stack.k, cfg.solver_overrides, cfg.k_scaling)
    log_stack = to_log(stack, cfg.floor)
    f_log, state = denoise(log_stack, solver_cfg)
    denoised = exp_image(f_log)
    noisy_mean = Image2D(stack.as_array().mean(axis=0))

    if cfg.output:
        save_image(cfg.output, denoised, bit_depth=cfg.output_bit_depth)
    if cfg.save_clean and clean is not None:
        save_image(cfg.save_clean, clean, bit_depth=cfg.output_bit_depth)
    if cfg.save_noisy:
        base = Path(cfg.save_noisy)
        for index, frame in enumerate(stack.frames):
            save_image(
                base.with_name(f"{base.stem}_{index:03d}{base.suffix}"),
                frame,
                bit_depth=cfg.output_bit_depth,
            )

    report: dict[str, Any] = {
        "mode": "phantom" if cfg.phantom is not None else "files",
        "inputs": list(cfg.inputs),
        "output": cfg.output,
        "k": stack.k,
        "height": stack.shape[0],
        "width": stack.shape[1],
        "registration": cfg.registration.value,
        "shifts": [list(s) for s in shifts],
        "mu": solver_cfg.mu,
        "lambda": solver_cfg.lam,
        "alpha": solver_cfg.alpha,
        "beta": solver_cfg.beta,
        "huber_delta": solver_cfg.huber.delta,
        "window": solver_cfg.quantile.window,
        "quantile_p": solver_cfg.quantile.p,
        "t_outer": solver_cfg.t_outer,
        "t_inner": solver_cfg.t_inner,
        "cg_tolerance": solver_cfg.cg_tolerance,
        "cg_max_iters": solver_cfg.cg_max_iters,
        "k_scaling": solver_cfg.k_scaling,
        "outer_iterations": state.outer_iter,
        "inner_iterations": state.inner_iter,
        "cg_iterations_total": int(sum(state.cg_iterations)),
        "energy_initial": state.energy_trace[0],
        "energy_final": state.energy_trace[-1],
        "energy_trace": list(state.energy_trace),
    }

    reference = clean
    if reference is None and cfg.reference:
        reference = load_image(cfg.reference)
    if reference is not None:
        report["psnr_noisy"] = psnr(noisy_mean, reference)
        report["psnr_denoised"] = psnr(denoised, reference)
        if min(denoised.shape) >= SSIM_WINDOW:
            report["ssim_noisy"] = ssim(noisy_mean, reference)
            report["ssim_denoised"] = ssim(denoised, reference)

    if cfg.regions:
        regions = load_regions(cfg.regions)
        noisy_m = _metric_image(noisy_mean, cfg.metrics_domain, cfg.floor)
        denoised_m = _metric_image(denoised, cfg.metrics_domain, cfg.floor)
        report["msr_noisy"] = msr(noisy_m, regions)
        report["msr_denoised"] = msr(denoised_m, regions)
        report["cnr_noisy"] = cnr(noisy_m, regions)
        report["cnr_denoised"] = cnr(denoised_m, regions)

    report["wall_time_s"] = time.perf_counter() - start
    if cfg.report_path:
        Path(cfg.report_path).write_text(format_report(report) + "\n")
    return report
