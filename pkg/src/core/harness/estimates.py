"""Growth, smoothness and gradient ratios of the kernel families over (x, y) sweeps."""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Sequence
from enum import StrEnum
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from src.config import settings
from src.core.exceptions import DiagonalError, DomainError
from src.core.kernels.families import (
    KernelSpec,
    banach_difference_norm,
    banach_norm,
    kernel_value,
    t_window,
)
from src.core.measure_geometry import ball_measure_fast
from src.core.models import AlphaLike, SweepGrid, as_alpha, as_point
from src.core.numdiff import partial_derivative
from src.core.reports import relative_growth
from src.core.tasks import JobStatus, fan_out

logger = logging.getLogger(__name__)

TAYLOR_DIVISORS = (4.0, 40.0, 400.0)


class RatioKind(StrEnum):
    GROWTH = "growth"
    SMOOTH_X = "smooth_x"
    SMOOTH_Y = "smooth_y"
    GRADIENT = "gradient"


def _gap(x: np.ndarray, y: np.ndarray) -> float:
    gap = float(np.linalg.norm(x - y))
    if gap == 0.0:
        raise DiagonalError(f"ratios are undefined on the diagonal x = y = {x.tolist()}")
    return gap


def _ball(alpha: np.ndarray, x: np.ndarray, r: float) -> float:
    return float(ball_measure_fast(alpha, x, r))


def growth_ratio(spec: KernelSpec, alpha: AlphaLike, x: Any, y: Any) -> float:
    """||K(x, y)|| * mu(B(x, |x - y|))."""
    alpha = as_alpha(alpha)
    x, y = as_point(x, alpha.size), as_point(y, alpha.size)
    gap = _gap(x, y)
    return banach_norm(spec, alpha, x, y) * _ball(alpha, x, gap)


def smoothness_ratio(spec: KernelSpec, alpha: AlphaLike, x: Any, x_prime: Any, y: Any) -> float:
    """||K(x, y) - K(x', y)|| over (|x - x'| / |x - y|) / mu(B(x, |x - y|))."""
    alpha = as_alpha(alpha)
    x, x_prime, y = (as_point(p, alpha.size) for p in (x, x_prime, y))
    gap = _gap(x, y)
    step = float(np.linalg.norm(x - x_prime))
    if not gap > 2.0 * step:
        raise DomainError(f"need |x - y| > 2|x - x'|, got {gap:.3e} and {step:.3e}")
    if step == 0.0:
        return 0.0
    difference = banach_difference_norm(spec, alpha, (x, y), (x_prime, y))
    return difference * _ball(alpha, x, gap) * gap / step


def smoothness_ratio_y(spec: KernelSpec, alpha: AlphaLike, x: Any, y: Any, y_prime: Any) -> float:
    """||K(x, y) - K(x, y')|| over (|y - y'| / |x - y|) / mu(B(x, |x - y|))."""
    alpha = as_alpha(alpha)
    x, y, y_prime = (as_point(p, alpha.size) for p in (x, y, y_prime))
    gap = _gap(x, y)
    step = float(np.linalg.norm(y - y_prime))
    if not gap > 2.0 * step:
        raise DomainError(f"need |x - y| > 2|y - y'|, got {gap:.3e} and {step:.3e}")
    if step == 0.0:
        return 0.0
    difference = banach_difference_norm(spec, alpha, (x, y), (x, y_prime))
    return difference * _ball(alpha, x, gap) * gap / step


def kernel_gradient(spec: KernelSpec, alpha: AlphaLike, x: Any, y: Any) -> np.ndarray:
    """(grad_x K, grad_y K) of a scalar family by Richardson differences on a fixed t-window."""
    if not spec.is_scalar:
        raise DomainError(f"{spec.label} is not scalar-valued")
    alpha = as_alpha(alpha)
    d = alpha.size
    x, y = as_point(x, d), as_point(y, d)
    gap = _gap(x, y)
    window = t_window(spec, alpha, x, y)
    h = 0.05 * min(gap, float(np.min(x)), float(np.min(y)))
    z = np.concatenate([x, y])

    def f(v: np.ndarray) -> complex | float:
        return kernel_value(spec, alpha, v[:d], v[d:], window)

    return np.array([partial_derivative(f, z, axis, h) for axis in range(2 * d)])


def gradient_ratio(spec: KernelSpec, alpha: AlphaLike, x: Any, y: Any) -> float:
    """|grad_(x,y) K(x, y)| * |x - y| * mu(B(x, |x - y|))."""
    alpha = as_alpha(alpha)
    x, y = as_point(x, alpha.size), as_point(y, alpha.size)
    gap = _gap(x, y)
    gradient = kernel_gradient(spec, alpha, x, y)
    return float(np.linalg.norm(np.abs(gradient))) * gap * _ball(alpha, x, gap)


def _toward(x: np.ndarray, y: np.ndarray, step: float) -> np.ndarray:
    """The point at distance step from x on the segment to y."""
    return x + step * (y - x) / np.linalg.norm(y - x)


class TaylorReport(BaseModel):
    """Difference norms at shrinking offsets x' -> x; first order means tenfold drops."""

    label: str
    alpha: list[float]
    x: list[float]
    y: list[float]
    offsets: list[float]
    norms: list[float]
    ratios: list[float]

    @property
    def passed(self) -> bool:
        return bool(self.ratios) and abs(self.ratios[-1] / 10.0 - 1.0) < 0.1


def taylor_check(spec: KernelSpec, alpha: AlphaLike, x: Any, y: Any) -> TaylorReport:
    alpha = as_alpha(alpha)
    x, y = as_point(x, alpha.size), as_point(y, alpha.size)
    gap = _gap(x, y)
    window = t_window(spec, alpha, x, y)
    offsets = [gap / k for k in TAYLOR_DIVISORS]
    norms = [
        banach_difference_norm(spec, alpha, (x, y), (_toward(x, y, h), y), window) for h in offsets
    ]
    ratios = [a / b if b > 0.0 else math.inf for a, b in zip(norms[:-1], norms[1:])]
    return TaylorReport(
        label=spec.label,
        alpha=alpha.tolist(),
        x=x.tolist(),
        y=y.tolist(),
        offsets=offsets,
        norms=norms,
        ratios=ratios,
    )


# -- sweeps -------------------------------------------------------------------------------


def point_ratios(spec: KernelSpec, alpha: np.ndarray, x: Any, y: Any) -> dict[str, float]:
    """All ratio kinds at one pair; smoothness offsets are |x - y| / 4 toward the other point."""
    x, y = as_point(x, alpha.size), as_point(y, alpha.size)
    step = _gap(x, y) / 4.0
    out = {
        RatioKind.GROWTH: growth_ratio(spec, alpha, x, y),
        RatioKind.SMOOTH_X: smoothness_ratio(spec, alpha, x, _toward(x, y, step), y),
        RatioKind.SMOOTH_Y: smoothness_ratio_y(spec, alpha, x, y, _toward(y, x, step)),
    }
    if spec.is_scalar:
        out[RatioKind.GRADIENT] = gradient_ratio(spec, alpha, x, y)
    return {str(kind): float(value) for kind, value in out.items()}


class FamilyReport(BaseModel):
    """Sup ratios of one family at one alpha, at the configured depth and one level deeper."""

    family: str
    label: str
    alpha: list[float]
    unproven: bool = False
    sups: dict[str, float] = Field(default_factory=dict)
    sups_refined: dict[str, float] = Field(default_factory=dict)
    per_depth: dict[str, dict[str, float]] = Field(default_factory=dict)
    worst: dict[str, dict[str, Any]] = Field(default_factory=dict)
    errors: list[dict[str, Any]] = Field(default_factory=list)
    runtime_seconds: float | None = None
    rows: list[dict[str, Any]] = Field(default_factory=list, exclude=True)

    @property
    def refinement_delta(self) -> dict[str, float]:
        return {
            kind: relative_growth(self.sups[kind], self.sups_refined[kind]) for kind in self.sups
        }

    @property
    def finite(self) -> bool:
        values = [*self.sups.values(), *self.sups_refined.values()]
        return all(math.isfinite(v) and v >= 0.0 for v in values)

    @property
    def stable(self) -> bool:
        limit = settings.REFINEMENT_GROWTH_LIMIT
        return self.finite and all(delta < limit for delta in self.refinement_delta.values())

    @property
    def passed(self) -> bool:
        return self.stable and not self.errors


def run_sweep(
    spec: KernelSpec,
    alpha: AlphaLike,
    grid: SweepGrid | None = None,
    threads: int | None = None,
    record_runtime: bool = False,
) -> FamilyReport:
    """Evaluate every ratio kind over the grid and over one extra near-diagonal level."""
    alpha = as_alpha(alpha)
    grid = grid or SweepGrid()
    started = time.perf_counter()
    base_levels = grid.levels(alpha.size)
    refined_levels = grid.levels(alpha.size, min(grid.depth + 1, len(grid.gaps)))
    keys = [(level, i) for level, pairs in refined_levels.items() for i in range(len(pairs))]

    def evaluate(key: tuple[str, int]) -> dict[str, float]:
        x, y = refined_levels[key[0]][key[1]]
        return point_ratios(spec, alpha, x, y)

    results = fan_out(evaluate, keys, threads)
    report = FamilyReport(
        family=str(spec.family), label=spec.label, alpha=alpha.tolist(), unproven=spec.unproven
    )
    for result in results:
        level, i = result.key
        x, y = refined_levels[level][i]
        if result.status == JobStatus.FAILED:
            report.errors.append(
                {"level": level, "x": list(x), "y": list(y), "error": result.error}
            )
            continue
        in_base = level in base_levels
        bad = {kind: value for kind, value in result.value.items() if not math.isfinite(value)}
        if bad:
            report.errors.append(
                {
                    "level": level,
                    "x": list(x),
                    "y": list(y),
                    "error": "non-finite ratio: "
                    + ", ".join(f"{kind}={value}" for kind, value in bad.items()),
                }
            )
        for kind, value in result.value.items():
            report.rows.append(
                {
                    "family": spec.label,
                    "alpha": alpha.tolist(),
                    "x": list(x),
                    "y": list(y),
                    "kind": kind,
                    "value": value,
                }
            )
            if kind in bad:
                value = math.inf
            depth_sups = report.per_depth.setdefault(kind, {})
            depth_sups[level] = max(depth_sups.get(level, 0.0), value)
            if kind not in report.worst or value > report.sups_refined[kind]:
                report.worst[kind] = {"x": list(x), "y": list(y), "value": result.value[kind]}
            report.sups_refined[kind] = max(report.sups_refined.get(kind, 0.0), value)
            if in_base:
                report.sups[kind] = max(report.sups.get(kind, 0.0), value)
    for kind in report.sups_refined:
        report.sups.setdefault(kind, 0.0)
    elapsed = time.perf_counter() - started
    logger.info(
        "%s at alpha=%s: %s points, %s errors, %.2fs",
        spec.label,
        alpha.tolist(),
        len(keys),
        len(report.errors),
        elapsed,
    )
    if record_runtime:
        report.runtime_seconds = elapsed
    return report


class EstimateReport(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    families: list[FamilyReport] = Field(default_factory=list)
    runtime_seconds: float | None = None

    @property
    def passed(self) -> bool:
        return bool(self.families) and all(report.passed for report in self.families)

    @property
    def rows(self) -> list[dict[str, Any]]:
        return [row for report in self.families for row in report.rows]


def run_estimates(
    families: Sequence[KernelSpec],
    alphas: Sequence[AlphaLike],
    grid: SweepGrid | None = None,
    threads: int | None = None,
    config: dict[str, Any] | None = None,
    record_runtime: bool = False,
) -> EstimateReport:
    if not families:
        raise DomainError("a sweep needs at least one kernel family")
    started = time.perf_counter()
    reports = [
        run_sweep(spec, alpha, grid, threads, record_runtime)
        for alpha in alphas
        for spec in families
    ]
    elapsed = time.perf_counter() - started
    logger.info("sweep finished in %.2fs", elapsed)
    return EstimateReport(
        config=config or {},
        families=reports,
        runtime_seconds=elapsed if record_runtime else None,
    )
