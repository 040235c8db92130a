"""The identity suite behind `verify`: every check returns a CheckResult."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from enum import StrEnum
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from src.config import settings
from src.core.exceptions import LaguerreError
from src.core.harness.lemmas import (
    lemma21_check,
    lemma23_check,
    lemma28_check,
    lemma28_log_value,
    lemma29_check,
)
from src.core.kernels.families import (
    NuMeasure,
    nu_exponential,
    psi_constant,
    psi_imaginary_power,
)
from src.core.kernels.heat import (
    heat_kernel_closed,
    heat_kernel_schlafli,
    heat_kernel_spectral,
    lemma27_sample,
    lemma210_sample,
    poisson_kernel,
    poisson_kernel_spectral,
)
from src.core.measure_geometry import comparability_check, doubling_check, lemma211_sample
from src.core.models import AlphaLike, SweepGrid, as_alpha, unit_index
from src.core.operators import (
    MultiplierSymbol,
    basis_matrix,
    gaussian_input,
    heat_apply,
    heat_input,
    multi_indices,
    multiplier_apply,
    project,
    riesz_operator_norm,
    riesz_pairing,
)
from src.core.quadrature import (
    ProductRule,
    mu_composite_rule,
    mu_gauss_laguerre_rule,
    pi_measure_graded_rule,
    pi_measure_rule,
    schlafli_bessel,
)
from src.core.reports import BandReport, CheckResult, SampleReport, SupReport, relative_growth
from src.core.special_fn import (
    apply_laguerre_operator,
    bessel_i_scaled,
    compose_derivative,
    faa_partitions,
    laguerre_fn,
    partition_count,
)

logger = logging.getLogger(__name__)

SCHLAFLI_ORDERS = (-0.5, -0.25, 0.25, 1.0, 2.0, 5.0)
SCHLAFLI_ARGUMENTS = (0.1, 1.0, 10.0, 50.0, 200.0)
SEMIGROUP_SAMPLES = (
    (0.1, 0.2, 0.5, 1.0),
    (0.3, 0.3, 1.0, 1.5),
    (0.5, 1.0, 0.2, 2.0),
    (1.0, 0.5, 1.2, 0.8),
    (2.0, 1.5, 0.7, 0.3),
)
SUBORDINATION_SAMPLES = ((0.3, 0.5, 0.9), (0.6, 1.2, 1.0), (1.0, 0.4, 2.0), (2.0, 1.5, 0.3))
ZETA_T_VALUES = tuple(float(T) for T in np.geomspace(1e-3, 1e3, 13))
BOUNDS_GRID = SweepGrid(coordinates=(0.1, 1.0, 5.0))


class VerifyProfile(StrEnum):
    QUICK = "quick"
    FULL = "full"


_SIZES = {
    VerifyProfile.QUICK: {
        "representation": 60,
        "recurrence": 1000,
        "samples": 10**4,
        "duality": 128,
    },
    VerifyProfile.FULL: {
        "representation": 500,
        "recurrence": 10**4,
        "samples": 10**5,
        "duality": 192,
    },
}


def _relative(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0.0 else 0.0


def _result(name: str, achieved: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(math.isfinite(achieved) and achieved <= tolerance),
        achieved=achieved,
        tolerance=tolerance,
        detail=detail,
    )


def _from_sample(report: SampleReport) -> CheckResult:
    detail = f"{report.violations} violations in {11 * report.samples} samples"
    if report.expected is None:
        achieved = relative_growth(report.sup, report.sup_refined)
        bound = settings.REFINEMENT_GROWTH_LIMIT
    else:
        achieved, bound = report.sup_refined, report.expected
    return CheckResult(
        name=report.name,
        passed=report.passed,
        achieved=achieved,
        tolerance=bound,
        detail=detail,
    )


def _from_band(report: BandReport) -> CheckResult:
    return CheckResult(
        name=report.name,
        passed=report.passed,
        achieved=report.spread_refined,
        tolerance=report.max_spread if report.max_spread is not None else math.inf,
        detail=f"band [{report.lo_refined:.6g}, {report.hi_refined:.6g}]",
    )


def _from_sup(report: SupReport) -> CheckResult:
    return CheckResult(
        name=report.name,
        passed=report.passed,
        achieved=report.growth,
        tolerance=settings.REFINEMENT_GROWTH_LIMIT,
        detail=f"sup {report.sup_refined:.6g} at {report.worst}",
    )


# -- kernels ------------------------------------------------------------------------------


def representation_agreement(alpha: AlphaLike, points: int = 60, seed: int = 0) -> CheckResult:
    """Closed form, eigen-series and Schlafli sum at random (t, x, y), pairwise.

    t is log-uniform on [0.05, 3] and coordinates uniform on [0.1, 3], keeping
    |x - y|^2 / 4t <= 10 so the kernel is not exponentially small.
    """
    alpha = as_alpha(alpha)
    rng = np.random.default_rng(seed)
    worst, where = 0.0, ""
    done = 0
    while done < points:
        t = float(np.exp(rng.uniform(math.log(0.05), math.log(3.0))))
        x = rng.uniform(0.1, 3.0, alpha.size)
        y = rng.uniform(0.1, 3.0, alpha.size)
        if float(np.sum((x - y) ** 2)) / (4.0 * t) > 10.0:
            continue
        done += 1
        closed = float(heat_kernel_closed(alpha, t, x, y))
        spectral = heat_kernel_spectral(alpha, t, x, y).value
        schlafli = heat_kernel_schlafli(alpha, t, x, y)
        error = max(_relative(closed, spectral), _relative(closed, schlafli))
        error = max(error, _relative(spectral, schlafli))
        if error > worst:
            worst, where = error, f"t={t:.4g}, x={x.tolist()}, y={y.tolist()}"
    return _result(f"representation_agreement{alpha.tolist()}", worst, 1e-6, where)


def schlafli_identity() -> CheckResult:
    """Pi_nu quadrature of exp(-z s) against scaled Bessel values; 80 nodes up to z = 50."""
    worst, where = 0.0, ""
    for nu in SCHLAFLI_ORDERS:
        for z in SCHLAFLI_ARGUMENTS:
            rule = pi_measure_rule(nu, 80) if z <= 50.0 else pi_measure_graded_rule(nu)
            error = _relative(schlafli_bessel(nu, z, rule), float(bessel_i_scaled(nu, z)))
            if error > worst:
                worst, where = error, f"nu={nu}, z={z}"
    return _result("schlafli_bessel", worst, 1e-9, where)


def bessel_recurrence(samples: int = 1000, seed: int = 0) -> CheckResult:
    """I_nu - I_(nu+2) = 2 (nu + 1) / z * I_(nu+1) on random nu in (-1, 6], z in (0, 200]."""
    rng = np.random.default_rng(seed)
    nu = rng.uniform(-1.0, 6.0, samples)
    nu = np.where(nu <= -1.0, -0.999, nu)
    z = 200.0 * (1.0 - rng.uniform(0.0, 1.0, samples))
    lower = np.asarray(bessel_i_scaled(nu, z))
    upper = np.asarray(bessel_i_scaled(nu + 2.0, z))
    middle = np.asarray(bessel_i_scaled(nu + 1.0, z))
    residual = np.abs(lower - upper - 2.0 * (nu + 1.0) / z * middle) / np.maximum(lower, 1e-300)
    i = int(np.argmax(residual))
    return _result(
        "bessel_recurrence", float(residual[i]), 1e-10, f"nu={nu[i]:.6g}, z={z[i]:.6g}"
    )


def orthonormality(alpha: AlphaLike, k_max: int = 6) -> CheckResult:
    """max |<l_j, l_k> - delta_jk| over |j|, |k| <= k_max on an exact Gauss-Laguerre rule."""
    alpha = as_alpha(alpha)
    rule = ProductRule(tuple(mu_gauss_laguerre_rule(float(a), k_max + 2) for a in alpha))
    nodes, weights = rule.tensor()
    basis = basis_matrix(alpha, multi_indices(alpha.size, k_max), nodes)
    gram = (basis * weights[:, None]).T @ basis
    deviation = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    return _result(f"orthonormality{alpha.tolist()}", deviation, 1e-7, f"|k| <= {k_max}")


def eigenvalue_identity(alpha: AlphaLike, h: float = 1e-3) -> CheckResult:
    """L_alpha l_k = (4|k| + 2|alpha| + 2d) l_k by central differences at interior points."""
    alpha = as_alpha(alpha)
    worst, where = 0.0, ""
    for k in multi_indices(alpha.size, 3):
        for c in (0.6, 1.1, 1.7):
            x = np.full(alpha.size, c) + 0.13 * np.arange(alpha.size)
            value = float(laguerre_fn(k, alpha, x))
            if abs(value) < 1e-2:
                continue
            applied = apply_laguerre_operator(
                lambda p, k=k: float(laguerre_fn(k, alpha, p)), alpha, x, h
            )
            eigen = 4.0 * k.sum() + 2.0 * alpha.sum() + 2.0 * alpha.size
            error = _relative(applied, eigen * value)
            if error > worst:
                worst, where = error, f"k={k.tolist()}, x={x.tolist()}"
    return _result(f"eigenvalue_identity{alpha.tolist()}", worst, 1e-4, where)


def chapman_kolmogorov(a: float) -> CheckResult:
    """Integral of G_t(x, z) G_s(z, y) d mu_a(z) against G_(t+s)(x, y), d = 1."""
    rule = mu_composite_rule(a, 0.0, 12.0, 64, 16)
    worst, where = 0.0, ""
    for t, s, x, y in SEMIGROUP_SAMPLES:
        z = rule.nodes[:, None]
        left = np.asarray(heat_kernel_closed([a], t, [x], z))
        right = np.asarray(heat_kernel_closed([a], s, z, [y]))
        composed = float((left * right) @ rule.weights)
        error = _relative(composed, float(heat_kernel_closed([a], t + s, [x], [y])))
        if error > worst:
            worst, where = error, f"t={t}, s={s}, x={x}, y={y}"
    return _result(f"chapman_kolmogorov[{a}]", worst, 1e-6, where)


def subordination(alpha: AlphaLike) -> CheckResult:
    """Subordinated Poisson kernel against its eigen-series for t >= 0.3."""
    alpha = as_alpha(alpha)
    worst, where = 0.0, ""
    for t, x0, y0 in SUBORDINATION_SAMPLES:
        x = np.full(alpha.size, x0)
        y = np.full(alpha.size, y0)
        error = _relative(
            poisson_kernel(alpha, t, x, y), poisson_kernel_spectral(alpha, t, x, y).value
        )
        if error > worst:
            worst, where = error, f"t={t}, x={x.tolist()}, y={y.tolist()}"
    return _result(f"subordination{alpha.tolist()}", worst, 1e-6, where)


# -- Faa di Bruno -------------------------------------------------------------------------


def partition_counts(N_max: int = 12) -> CheckResult:
    mismatches = [N for N in range(1, N_max + 1) if len(faa_partitions(N)) != partition_count(N)]
    return _result(
        "faa_partition_counts", float(len(mismatches)), 0.0, f"mismatch at N={mismatches}"
    )


def _contour_derivative(h, x0: float, N: int, radius: float = 0.5, points: int = 64) -> float:
    """N-th derivative of an entire function from the trapezoid rule on a circle."""
    theta = 2.0 * np.pi * np.arange(points) / points
    z = x0 + radius * np.exp(1j * theta)
    coeff = np.mean(h(z) * np.exp(-1j * N * theta)) / radius**N
    return float(math.factorial(N) * coeff.real)


def faa_composition(pairs: int = 5, N_max: int = 5, seed: int = 0) -> CheckResult:
    """compose_derivative for exp(sin(a x) + b x^2) against a contour-integral derivative."""
    rng = np.random.default_rng(seed)
    worst, where = 0.0, ""
    for _ in range(pairs):
        a, b, x0 = rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)
        f0 = math.sin(a * x0) + b * x0 * x0
        cycle = [math.sin(a * x0), math.cos(a * x0), -math.sin(a * x0), -math.cos(a * x0)]
        f_derivs = [a**j * cycle[j % 4] for j in range(1, N_max + 1)]
        f_derivs[0] += 2.0 * b * x0
        f_derivs[1] += 2.0 * b

        def h(z: np.ndarray) -> np.ndarray:
            return np.exp(np.sin(a * z) + b * z * z)

        for N in range(1, N_max + 1):
            value = compose_derivative([math.exp(f0)] * (N + 1), f_derivs, N)
            error = _relative(value, _contour_derivative(h, x0, N))
            if error > worst:
                worst, where = error, f"N={N}, a={a:.4g}, b={b:.4g}, x0={x0:.4g}"
    return _result("faa_composition", worst, 1e-4, where)


# -- operators ----------------------------------------------------------------------------


def multiplier_degeneracies(alpha: AlphaLike, k_max: int = 16) -> list[CheckResult]:
    alpha = as_alpha(alpha)
    v = project(gaussian_input(np.full(alpha.size, 1.0), 0.5), alpha, k_max)
    identity = multiplier_apply(v, MultiplierSymbol.laplace(psi_constant(1.0)))
    atom = multiplier_apply(v, MultiplierSymbol.stieltjes(NuMeasure.atom(0.7)))
    power = multiplier_apply(v, MultiplierSymbol.laplace(psi_imaginary_power(0.5)))
    return [
        _result(
            "multiplier_identity",
            float(np.max(np.abs(identity.coeffs - v.coeffs))),
            1e-10,
        ),
        _result(
            "multiplier_atom_is_heat",
            float(np.max(np.abs(atom.coeffs - heat_apply(v, 0.7).coeffs))),
            0.0,
        ),
        _result(
            "multiplier_unit_modulus",
            float(np.max(np.abs(np.abs(power.coeffs) - np.abs(v.coeffs)))),
            1e-8,
        ),
        _result(
            "multiplier_exponential_measure",
            float(
                np.max(
                    np.abs(
                        multiplier_apply(v, MultiplierSymbol.stieltjes(nu_exponential(1.0))).coeffs
                        - v.coeffs / (1.0 + v.eigenvalues)
                    )
                )
            ),
            1e-8,
        ),
    ]


def riesz_norm_sequence(alpha: AlphaLike, orders: Sequence[int] = (8, 16, 32)) -> CheckResult:
    """Truncated Riesz norms for growing truncations; successive changes below 5%."""
    alpha = as_alpha(alpha)
    n = unit_index(alpha.size)
    norms = [riesz_operator_norm(alpha, n, k) for k in orders]
    changes = [abs(b - a) / a for a, b in zip(norms[:-1], norms[1:])]
    return _result(
        f"riesz_norm_sequence{alpha.tolist()}",
        changes[-1],
        0.05,
        "norms " + ", ".join(f"{v:.6g}" for v in norms),
    )


def riesz_duality(alpha: AlphaLike, k_max: int = 128, s: float = 0.02) -> CheckResult:
    """<R f, g> spectrally against the kernel double integral, f and g heat bumps.

    f = G_s(., 1) and g = G_s(., 1 + 3.3 e_1), each cut where it drops below 1e-14
    of its peak, which leaves their supports apart.
    """
    alpha = as_alpha(alpha)
    center = np.full(alpha.size, 1.0)
    f = heat_input(alpha, s, center)
    g = heat_input(alpha, s, center + 3.3 * unit_index(alpha.size))
    spectral, kernel_side = riesz_pairing(alpha, unit_index(alpha.size), f, g, k_max)
    return _result(
        f"riesz_duality{alpha.tolist()}",
        _relative(spectral, kernel_side),
        1e-3,
        f"spectral={spectral:.9g}, kernel={kernel_side:.9g}, K={k_max}",
    )


# -- integral bounds ----------------------------------------------------------------------


def zeta_closed_form(T_values: Sequence[float] = ZETA_T_VALUES) -> CheckResult:
    """The zeta integral at a = 2, b = 1, M = 0 normalizes to e^(-T)."""
    errors = [abs(lemma28_log_value(2.0, 1.0, 0.0, T) + T) for T in T_values]
    i = int(np.argmax(errors))
    return _result("zeta_integral_closed_form", errors[i], 1e-8, f"T={T_values[i]:.4g}")


def integral_bounds(alpha: AlphaLike) -> list[CheckResult]:
    """q_+ integrals with kappa = 1/2 and the heat-maximal L^inf time norm."""
    alpha = as_alpha(alpha)
    zeros = [0] * alpha.size
    q_plus = lemma21_check(alpha, [0.0] * alpha.size, [0.5] * alpha.size, BOUNDS_GRID)
    checks = [_from_sup(report) for report in q_plus.values()]
    checks.append(_from_sup(lemma29_check(alpha, zeros, zeros, zeros, grid=BOUNDS_GRID)))
    return checks


# -- the suite ----------------------------------------------------------------------------


class VerifyReport(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    checks: list[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]


def _guarded(name: str, run) -> list[CheckResult]:
    """Run one check; a numerical failure becomes a failed result."""
    try:
        out = run()
    except LaguerreError as exc:
        logger.warning("check %s raised %s", name, exc)
        failed = CheckResult(
            name=name, passed=False, achieved=math.inf, tolerance=0.0, detail=str(exc)
        )
        return [failed]
    return out if isinstance(out, list) else [out]


def run_verify(
    alphas: Sequence[AlphaLike],
    profile: VerifyProfile = VerifyProfile.QUICK,
    seed: int = 0,
    config: dict[str, Any] | None = None,
) -> VerifyReport:
    """Identity, sampling and integral-bound checks for every alpha.

    The profile sets sample sizes and the Riesz duality truncation. Duality and the
    d = 1 ball checks run for one-dimensional alphas only.
    """
    sizes = _SIZES[VerifyProfile(profile)]
    samples = sizes["samples"]
    checks: list[CheckResult] = []
    checks += _guarded("schlafli_bessel", schlafli_identity)
    checks += _guarded("bessel_recurrence", lambda: bessel_recurrence(sizes["recurrence"], seed))
    checks += _guarded("faa_partition_counts", partition_counts)
    checks += _guarded("faa_composition", lambda: faa_composition(seed=seed))
    checks += _guarded("zeta_integral_closed_form", zeta_closed_form)
    checks += _guarded("zeta_integral", lambda: _from_sup(lemma28_check(3.0, 2.0, 2.0)))
    checks += _guarded("pi_power_integral", lambda: _from_sup(lemma23_check(0.5, 0.7, 1.0)))
    dims = sorted({as_alpha(alpha).size for alpha in alphas})
    for dim in dims:
        checks += _guarded(
            "q_form_comparability",
            lambda dim=dim: _from_sample(lemma210_sample(dim, samples, seed)),
        )
    for alpha in alphas:
        alpha = as_alpha(alpha)
        logger.info("verifying alpha=%s", alpha.tolist())
        checks += _guarded(
            "representation_agreement",
            lambda: representation_agreement(alpha, sizes["representation"], seed),
        )
        checks += _guarded("orthonormality", lambda: orthonormality(alpha))
        checks += _guarded("eigenvalue_identity", lambda: eigenvalue_identity(alpha))
        for a in alpha:
            checks += _guarded("chapman_kolmogorov", lambda a=a: chapman_kolmogorov(float(a)))
        checks += _guarded("subordination", lambda: subordination(alpha))
        checks += _guarded(
            "pointwise_bounds",
            lambda: [_from_sample(r) for r in lemma27_sample(alpha, samples, seed).values()],
        )
        checks += _guarded(
            "ball_ratio_comparability", lambda: _from_sample(lemma211_sample(alpha, samples, seed))
        )
        if alpha.size == 1:
            checks += _guarded("doubling", lambda: _from_sup(doubling_check(alpha)))
            checks += _guarded(
                "ball_volume_comparability", lambda: _from_band(comparability_check(alpha))
            )
        checks += _guarded("multiplier_degeneracies", lambda: multiplier_degeneracies(alpha))
        checks += _guarded("riesz_norm_sequence", lambda: riesz_norm_sequence(alpha))
        checks += _guarded("integral_bounds", lambda: integral_bounds(alpha))
        if alpha.size == 1:
            checks += _guarded("riesz_duality", lambda: riesz_duality(alpha, sizes["duality"]))
    report = VerifyReport(config=config or {}, checks=checks)
    logger.info("%s of %s checks passed", len(checks) - len(report.failures), len(checks))
    return report

