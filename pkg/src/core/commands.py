"""`verify`, `sweep`, `kernel` and `apply`: the command-line surface."""

from __future__ import annotations

import argparse
import itertools
import logging
import logging.config
from enum import IntEnum
from pathlib import Path
from typing import Any

import numpy as np

from src.config import settings
from src.core.exceptions import ConfigError, DomainError, LaguerreError
from src.core.harness.estimates import EstimateReport, run_estimates
from src.core.harness.identities import VerifyProfile, VerifyReport, run_verify
from src.core.kernels.families import psi_constant
from src.core.kernels.heat import (
    heat_kernel_closed,
    heat_kernel_schlafli,
    heat_kernel_spectral,
)
from src.core.operators import (
    MultiplierSymbol,
    SpectralVector,
    gfun_apply,
    heat_apply,
    maximal_apply,
    multiplier_apply,
    project,
    riesz_apply,
    riesz_kernel_apply,
    synthesize,
)
from src.core.serializers import (
    ApplyConfig,
    KernelRequest,
    OperatorName,
    OutputFormat,
    Representation,
    SweepConfig,
    VerifyConfig,
    parse_config,
    read_payload,
    report_payload,
    to_csv,
    to_json,
    write_output,
)

logger = logging.getLogger(__name__)

CHECK_FIELDS = ("name", "passed", "achieved", "tolerance", "detail")
SWEEP_FIELDS = ("family", "alpha", "x", "y", "kind", "value")
APPLY_FIELDS = ("x", "input", "value_re", "value_im", "kernel_side")


class ExitCode(IntEnum):
    OK = 0
    FAILED = 1
    USAGE = 2


def _with_flags(payload: dict[str, Any], **flags: Any) -> dict[str, Any]:
    """Command-line flags win over the config file; unset flags leave it alone."""
    return {**payload, **{key: value for key, value in flags.items() if value is not None}}


def _emit(
    args: argparse.Namespace, payload: Any, rows: list[dict], fields: tuple[str, ...]
) -> None:
    """Machine output: the chosen format to --out, the other one next to it for sweeps."""
    if args.out is None:
        return
    out = Path(args.out)
    if args.format == OutputFormat.CSV:
        write_output(to_csv(rows, fields), out)
        if args.command == "sweep":
            write_output(to_json(payload), out.with_suffix(".json"))
    else:
        write_output(to_json(payload), out)
        if args.command == "sweep":
            write_output(to_csv(rows, fields), out.with_suffix(".csv"))


def _fmt(value: float) -> str:
    return f"{value:.6g}"


# -- verify -------------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> ExitCode:
    payload = _with_flags(
        read_payload(args.config),
        alphas=[args.alpha] if args.alpha else None,
        dim=args.dim,
        profile=args.profile,
        seed=args.seed,
    )
    config = parse_config(VerifyConfig, payload)
    with config.quadrature.applied():
        report: VerifyReport = run_verify(
            config.resolved_alphas,
            config.profile,
            config.seed,
            config=config.model_dump(mode="json"),
        )
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(
            f"{status}  {check.name:<44} achieved {_fmt(check.achieved):>12}  "
            f"tolerance {_fmt(check.tolerance):>10}  {check.detail}"
        )
    print(f"{len(report.checks) - len(report.failures)}/{len(report.checks)} checks passed")
    rows = [check.model_dump() for check in report.checks]
    _emit(args, report_payload(report), rows, CHECK_FIELDS)
    return ExitCode.OK if report.passed else ExitCode.FAILED


# -- sweep --------------------------------------------------------------------------------


def cmd_sweep(args: argparse.Namespace) -> ExitCode:
    payload = _with_flags(read_payload(args.config), seed=args.seed, threads=args.threads)
    config = parse_config(SweepConfig, payload)
    reports = []
    with config.quadrature.applied():
        for alpha in config.alphas:
            families = config.build_families(len(alpha))
            reports.extend(
                run_estimates(
                    families, [alpha], config.grid, config.threads, None, config.record_runtime
                ).families
            )
    report = EstimateReport(config=config.model_dump(mode="json"), families=reports)
    for family in report.families:
        status = "PASS" if family.passed else "FAIL"
        delta = family.refinement_delta
        for kind in family.sups:
            print(
                f"{status}  {family.label:<36} alpha={family.alpha}  {kind:<9} "
                f"sup {_fmt(family.sups[kind]):>12}  refined {_fmt(family.sups_refined[kind]):>12}"
                f"  growth {_fmt(delta[kind]):>10}"
            )
        if family.errors:
            print(f"      {len(family.errors)} grid points failed for {family.label}")
    payload = report_payload(report)
    payload["families"] = [
        {**report_payload(family), "refinement_delta": family.refinement_delta}
        for family in report.families
    ]
    _emit(args, payload, report.rows, SWEEP_FIELDS)
    return ExitCode.OK if report.passed else ExitCode.FAILED


# -- kernel -------------------------------------------------------------------------------


def cmd_kernel(args: argparse.Namespace) -> ExitCode:
    request = parse_config(
        KernelRequest,
        _with_flags({}, alpha=args.alpha, t=args.t, x=args.x, y=args.y, rep=args.rep),
    )
    reps = (
        [Representation.CLOSED, Representation.SPECTRAL, Representation.SCHLAFLI]
        if request.rep == Representation.ALL
        else [request.rep]
    )
    values: dict[str, float] = {}
    shells: list[float] = []
    for rep in reps:
        match rep:
            case Representation.CLOSED:
                value = heat_kernel_closed(request.alpha, request.t, request.x, request.y)
                values[rep] = float(value)
            case Representation.SPECTRAL:
                series = heat_kernel_spectral(request.alpha, request.t, request.x, request.y)
                values[rep] = series.value
                shells = series.shells[: request.shells].tolist()
            case Representation.SCHLAFLI:
                values[rep] = heat_kernel_schlafli(request.alpha, request.t, request.x, request.y)
    differences = {
        f"{a}-{b}": abs(values[a] - values[b]) / max(abs(values[a]), abs(values[b]), 1e-300)
        for a, b in itertools.combinations(values, 2)
    }
    for rep, value in values.items():
        print(f"{rep:<9} {value:.6e}")
    for pair, difference in differences.items():
        print(f"{pair:<18} relative difference {difference:.3e}")
    for j, shell in enumerate(shells):
        print(f"shell |k|={j}: {shell:.6e}")
    payload = {
        "request": request.model_dump(mode="json"),
        "values": values,
        "differences": differences,
        "shells": shells,
    }
    rows = [{"x": list(request.x), "input": rep, "value_re": v} for rep, v in values.items()]
    _emit(args, payload, rows, ("x", "input", "value_re"))
    return ExitCode.OK


# -- apply --------------------------------------------------------------------------------


def _input_vector(config: ApplyConfig) -> SpectralVector:
    if config.input.is_coefficients:
        return config.input.vector(config.alpha, config.k_max)
    return project(config.input.build(config.alpha), config.alpha, config.k_max)


def _outside_support(support: tuple[tuple[float, float], ...] | None, x: np.ndarray) -> bool:
    if support is None:
        return False
    return any(not lo <= xi <= hi for (lo, hi), xi in zip(support, x))


def apply_operator(config: ApplyConfig) -> list[dict[str, Any]]:
    """Operator output on the configured points, one row per point."""
    v = _input_vector(config)
    points = np.asarray(config.points, dtype=float)
    dim = len(config.alpha)
    kernel_side = [None] * len(points)
    match config.op:
        case OperatorName.HEAT:
            values = synthesize(heat_apply(v, config.t), points)
        case OperatorName.MAXIMAL:
            values = np.array([maximal_apply(v, p) for p in points])
        case OperatorName.RIESZ:
            values = riesz_apply(v, config.n, points)
            if not config.input.is_coefficients:
                f = config.input.build(config.alpha)
                kernel_side = [
                    float(riesz_kernel_apply(config.alpha, config.n, f, p))
                    if _outside_support(f.support, p)
                    else None
                    for p in points
                ]
        case OperatorName.GFUN:
            n = config.n or (0,) * dim
            values = np.array([gfun_apply(v, n, config.m, p) for p in points])
        case OperatorName.LAPLACE_MULT:
            psi = config.psi.build() if config.psi else psi_constant(1.0)
            values = synthesize(multiplier_apply(v, MultiplierSymbol.laplace(psi)), points)
        case OperatorName.STIELTJES_MULT:
            symbol = MultiplierSymbol.stieltjes(config.nu.build())
            values = synthesize(multiplier_apply(v, symbol), points)
    values = np.atleast_1d(np.asarray(values))
    inputs = np.atleast_1d(np.asarray(synthesize(v, points)))
    return [
        {
            "x": p.tolist(),
            "input": float(np.real(f_value)),
            "value_re": float(np.real(value)),
            "value_im": float(np.imag(value)),
            "kernel_side": side if side is not None else "",
        }
        for p, f_value, value, side in zip(points, inputs, values, kernel_side)
    ]


def cmd_apply(args: argparse.Namespace) -> ExitCode:
    config = parse_config(ApplyConfig, _with_flags(read_payload(args.config), op=args.op))
    with config.quadrature.applied():
        rows = apply_operator(config)
    for row in rows:
        side = f"  kernel {_fmt(row['kernel_side'])}" if row["kernel_side"] != "" else ""
        imag = f" {row['value_im']:+.6g}i" if row["value_im"] else ""
        value = f"{_fmt(row['value_re'])}{imag}"
        print(f"x={row['x']}  f {_fmt(row['input'])}  {config.op} {value}{side}")
    payload = {"config": config.model_dump(mode="json"), "rows": rows}
    _emit(args, payload, rows, APPLY_FIELDS)
    return ExitCode.OK


# -- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the machine-readable report here")
    common.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value
    )
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--log-level", dest="log_level")

    parser = argparse.ArgumentParser(prog="laguerre-cz")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", parents=[common], help="run the identity suite")
    verify.add_argument("--alpha", type=float, nargs="+")
    verify.add_argument("--dim", type=int)
    verify.add_argument("--profile", choices=[p.value for p in VerifyProfile])
    verify.add_argument("--config")
    verify.set_defaults(handler=cmd_verify)

    sweep = commands.add_parser("sweep", parents=[common], help="standard-estimate sweeps")
    sweep.add_argument("--config")
    sweep.set_defaults(handler=cmd_sweep)

    kernel = commands.add_parser("kernel", parents=[common], help="evaluate the heat kernel")
    kernel.add_argument("--alpha", type=float, nargs="+", required=True)
    kernel.add_argument("--t", type=float, required=True)
    kernel.add_argument("--x", type=float, nargs="+", required=True)
    kernel.add_argument("--y", type=float, nargs="+", required=True)
    kernel.add_argument("--rep", choices=[r.value for r in Representation], default="all")
    kernel.set_defaults(handler=cmd_kernel)

    apply = commands.add_parser("apply", parents=[common], help="apply an operator")
    apply.add_argument("--op", choices=[o.value for o in OperatorName])
    apply.add_argument("--config", required=True)
    apply.set_defaults(handler=cmd_apply)
    return parser


def configure_logging(level: str | None) -> None:
    logging.config.dictConfig(settings.LOGGING)
    if level:
        logging.getLogger().setLevel(level.upper())


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ExitCode.OK if exc.code == 0 else ExitCode.USAGE
    configure_logging(args.log_level)
    try:
        return int(args.handler(args))
    except (ConfigError, DomainError) as exc:
        logger.error("%s", exc)
        return int(ExitCode.USAGE)
    except LaguerreError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return int(ExitCode.FAILED)
