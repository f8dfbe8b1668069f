"""Command-line interface.

Subcommands:

* ``denoise``: run the pipeline on image files.
* ``phantom``: run it on a synthetic speckled phantom (self-contained demo).
* ``metrics``: evaluate quality metrics on an existing image.
* ``register``: align a stack of frames and write the shifted copies.

Exit codes: 0 success, 2 I/O error, 3 invalid input or configuration,
4 numeric or registration failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import DataIOError, InvalidInputError, NumericError, RegistrationError
from .image_core import DEFAULT_INTENSITY_FLOOR, BScanStack, Domain, PhantomSpec
from .image_io import load_image, save_image
from .metrics import cnr, load_regions, msr, psnr, ssim, SSIM_WINDOW
from .pipeline import JobConfig, Registration, format_report, run_job, _metric_image
from .registration import DEFAULT_SEARCH, register_stack

EXIT_OK = 0
EXIT_IO = 2
EXIT_CONFIG = 3
EXIT_NUMERIC = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for I/O here
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver overrides")
    group.add_argument("--mu", type=float, help="TV weight")
    group.add_argument("--lambda", dest="lam", type=float, help="quantile prior weight")
    group.add_argument("--alpha", type=float, help="quantile constraint multiplier")
    group.add_argument("--beta", type=float, help="TV constraint multiplier")
    group.add_argument("--t-outer", type=int, help="outer iterations (re-linearizations)")
    group.add_argument("--t-inner", type=int, help="inner iterations per outer")
    group.add_argument("--window", type=int, help="quantile filter window side (odd)")
    group.add_argument("--quantile-p", type=float, help="quantile parameter in [0, 1]")
    group.add_argument("--huber-delta", type=float, help="Huber transition threshold")
    group.add_argument("--cg-max-iters", type=int, help="CG iteration cap")
    group.add_argument("--cg-tol", dest="cg_tolerance", type=float, help="CG relative residual tolerance")
    group.add_argument(
        "--no-k-scaling",
        action="store_true",
        help="do not scale the default weights by the frame count",
    )


def _solver_overrides(args: argparse.Namespace) -> dict:
    keys = (
        "mu",
        "lam",
        "alpha",
        "beta",
        "t_outer",
        "t_inner",
        "window",
        "quantile_p",
        "huber_delta",
        "cg_max_iters",
        "cg_tolerance",
    )
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="octdenoise", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_den = sub.add_parser("denoise", help="denoise a stack of image files")
    p_den.add_argument("inputs", nargs="+", help="frame image files (same scene)")
    p_den.add_argument("-o", "--output", help="denoised image path")
    p_den.add_argument("--k", type=int, help="use only the first K inputs")
    p_den.add_argument(
        "--registration",
        choices=[r.value for r in Registration],
        default=Registration.CROSS_CORRELATION.value,
    )
    p_den.add_argument("--search", type=int, default=DEFAULT_SEARCH, help="registration search radius")
    p_den.add_argument("--floor", type=float, default=DEFAULT_INTENSITY_FLOOR)
    p_den.add_argument("--reference", help="clean reference image for PSNR/SSIM")
    p_den.add_argument("--regions", help="region sidecar file for MSR/CNR")
    p_den.add_argument("--metrics-domain", choices=["log", "linear"], default="log")
    p_den.add_argument("--report", dest="report_path", help="also write the JSON report here")
    p_den.add_argument("--bits", type=int, choices=[8, 16], help="output bit depth (PGM/PNG)")
    _add_solver_flags(p_den)

    p_ph = sub.add_parser("phantom", help="denoise a synthetic speckled phantom")
    p_ph.add_argument("-o", "--output", help="denoised image path")
    p_ph.add_argument("--k", type=int, default=4, help="number of speckled frames")
    p_ph.add_argument("--width", type=int, default=128)
    p_ph.add_argument("--height", type=int, default=128)
    p_ph.add_argument("--looks", type=int, default=4, help="speckle looks (higher = milder)")
    p_ph.add_argument("--seed", type=int, default=0)
    p_ph.add_argument("--boundaries", type=_int_list, help="comma-separated band start rows")
    p_ph.add_argument("--intensities", type=_float_list, help="comma-separated band intensities")
    p_ph.add_argument("--save-clean", help="write the clean phantom here")
    p_ph.add_argument("--save-noisy", help="write the noisy frames here (indexed)")
    p_ph.add_argument("--report", dest="report_path")
    p_ph.add_argument("--bits", type=int, choices=[8, 16])
    p_ph.add_argument("--floor", type=float, default=DEFAULT_INTENSITY_FLOOR)
    _add_solver_flags(p_ph)

    p_met = sub.add_parser("metrics", help="evaluate metrics on an image")
    p_met.add_argument("image")
    p_met.add_argument("--reference", help="reference image for PSNR/SSIM")
    p_met.add_argument("--regions", help="region sidecar file for MSR/CNR")
    p_met.add_argument("--peak", type=float, default=1.0)
    p_met.add_argument(
        "--domain",
        choices=["as-is", "log"],
        default="as-is",
        help="transform images to log intensities before MSR/CNR",
    )
    p_met.add_argument("--floor", type=float, default=DEFAULT_INTENSITY_FLOOR)

    p_reg = sub.add_parser("register", help="align frames to the central one")
    p_reg.add_argument("inputs", nargs="+")
    p_reg.add_argument("-o", "--outdir", required=True)
    p_reg.add_argument("--search", type=int, default=DEFAULT_SEARCH)

    return parser


def _cmd_denoise(args: argparse.Namespace) -> dict:
    cfg = JobConfig(
        inputs=tuple(args.inputs),
        output=args.output,
        k=args.k,
        registration=Registration(args.registration),
        search=args.search,
        floor=args.floor,
        k_scaling=not args.no_k_scaling,
        solver_overrides=_solver_overrides(args),
        reference=args.reference,
        regions=args.regions,
        metrics_domain=args.metrics_domain,
        report_path=args.report_path,
        output_bit_depth=args.bits,
    )
    return run_job(cfg)


def _default_phantom(args: argparse.Namespace) -> PhantomSpec:
    boundaries = args.boundaries
    intensities = args.intensities
    if boundaries is None and intensities is None:
        # layered bands loosely resembling a retinal cross-section
        fractions = (0.25, 0.45, 0.6, 0.8)
        boundaries = tuple(max(1, int(f * args.height)) for f in fractions)
        intensities = (0.15, 0.75, 0.4, 0.85, 0.25)
    elif boundaries is None or intensities is None:
        raise InvalidInputError("--boundaries and --intensities go together")
    return PhantomSpec(
        width=args.width,
        height=args.height,
        intensities=intensities,
        boundaries=boundaries,
        looks=args.looks,
        seed=args.seed,
    )


def _cmd_phantom(args: argparse.Namespace) -> dict:
    cfg = JobConfig(
        phantom=_default_phantom(args),
        output=args.output,
        k=args.k,
        registration=Registration.NONE,
        floor=args.floor,
        k_scaling=not args.no_k_scaling,
        solver_overrides=_solver_overrides(args),
        save_clean=args.save_clean,
        save_noisy=args.save_noisy,
        report_path=args.report_path,
        output_bit_depth=args.bits,
    )
    return run_job(cfg)


def _cmd_metrics(args: argparse.Namespace) -> dict:
    image = load_image(args.image)
    report: dict = {"image": args.image}
    if args.reference:
        reference = load_image(args.reference)
        report["psnr"] = psnr(image, reference, args.peak)
        if min(image.shape) >= SSIM_WINDOW:
            report["ssim"] = ssim(image, reference, args.peak)
    if args.regions:
        regions = load_regions(args.regions)
        domain = "log" if args.domain == "log" else "linear"
        measured = _metric_image(image, domain, args.floor)
        report["msr"] = msr(measured, regions)
        report["cnr"] = cnr(measured, regions)
    if len(report) == 1:
        raise InvalidInputError("nothing to compute: pass --reference and/or --regions")
    return report


def _cmd_register(args: argparse.Namespace) -> dict:
    frames = tuple(load_image(p) for p in args.inputs)
    stack = BScanStack(frames, Domain.LINEAR)
    registered, shifts = register_stack(stack, args.search)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for index, (path, frame) in enumerate(zip(args.inputs, registered.frames)):
        out = outdir / f"reg_{index:03d}{Path(path).suffix}"
        save_image(out, frame)
        outputs.append(str(out))
    return {
        "inputs": list(args.inputs),
        "outputs": outputs,
        "shifts": [list(s) for s in shifts],
    }


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "denoise": _cmd_denoise,
        "phantom": _cmd_phantom,
        "metrics": _cmd_metrics,
        "register": _cmd_register,
    }
    try:
        report = handlers[args.command](args)
    except DataIOError as exc:
        print(f"octdenoise: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidInputError as exc:
        print(f"octdenoise: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, RegistrationError) as exc:
        print(f"octdenoise: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(format_report(report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
