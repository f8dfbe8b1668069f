"""Spatio-temporal speckle denoising for OCT B-scan stacks.

Denoises one or more registered frames by energy minimization in the log
intensity domain: a Huber data term over all frames, anisotropic total
variation, and a quantile-filter fixed-point prior (the 3x3 median by
default), solved with a split-variable ADMM scheme that re-linearizes
the quantile filter as it converges. Ships with quality metrics
(PSNR, SSIM, MSR, CNR), integer-shift cross-correlation registration,
synthetic speckle phantoms, basic image I/O, and a batch CLI.
"""

from .admm_solver import (
    SolverConfig,
    SolverState,
    conjugate_gradient,
    default_config,
    denoise,
    energy,
    shrink,
    solve_f_update,
    system_operator,
    tv_only_config,
    update_auxiliaries,
    update_bregman,
)
from .diff_ops import GradientField, gradient, gradient_adjoint, tv_value
from .errors import (
    DataIOError,
    DenoiseError,
    InvalidInputError,
    NumericError,
    NumericRangeError,
    RegistrationError,
)
from .image_core import (
    BScanStack,
    DEFAULT_INTENSITY_FLOOR,
    Domain,
    Image2D,
    PhantomSpec,
    exp_image,
    from_log,
    generate_phantom,
    log_image,
    to_log,
)
from .image_io import load_image, save_image
from .metrics import Region, RegionSet, cnr, load_regions, msr, psnr, ssim
from .pipeline import JobConfig, Registration, build_solver_config, format_report, run_job
from .quantile_prior import (
    Boundary,
    QuantileConfig,
    QuantileLinearization,
    assemble_linearization,
    prior_value,
    quantile_filter,
)
from .registration import apply_shift, estimate_shift, register_stack
from .robust_loss import HuberParams, huber_derivative, huber_value, irls_weight

__version__ = "0.1.0"

__all__ = [
    "BScanStack",
    "Boundary",
    "DEFAULT_INTENSITY_FLOOR",
    "DataIOError",
    "DenoiseError",
    "Domain",
    "GradientField",
    "HuberParams",
    "Image2D",
    "InvalidInputError",
    "JobConfig",
    "NumericError",
    "NumericRangeError",
    "PhantomSpec",
    "QuantileConfig",
    "QuantileLinearization",
    "Region",
    "RegionSet",
    "Registration",
    "RegistrationError",
    "SolverConfig",
    "SolverState",
    "apply_shift",
    "assemble_linearization",
    "build_solver_config",
    "cnr",
    "conjugate_gradient",
    "default_config",
    "denoise",
    "energy",
    "estimate_shift",
    "exp_image",
    "format_report",
    "from_log",
    "generate_phantom",
    "gradient",
    "gradient_adjoint",
    "huber_derivative",
    "huber_value",
    "irls_weight",
    "load_image",
    "load_regions",
    "log_image",
    "msr",
    "prior_value",
    "psnr",
    "quantile_filter",
    "register_stack",
    "run_job",
    "save_image",
    "shrink",
    "solve_f_update",
    "ssim",
    "system_operator",
    "to_log",
    "tv_only_config",
    "tv_value",
    "update_auxiliaries",
    "update_bregman",
]
