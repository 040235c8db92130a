"""Bounded-ratio checks of the integral lemmas behind the standard estimates."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
from scipy import special

from src.config import settings
from src.core.exceptions import DomainError
from src.core.kernels.families import TWindow, refined_sup
from src.core.measure_geometry import ball_measure_fast
from src.core.models import AlphaLike, SweepGrid, as_alpha, as_point
from src.core.quadrature import (
    ProductRule,
    adaptive_quad,
    pi_measure_graded_rule,
    pi_total_mass,
    t_weighted_grid,
)
from src.core.reports import SupReport

logger = logging.getLogger(__name__)


def _grid_sup(
    name: str,
    ratio: Callable[[np.ndarray, np.ndarray], float],
    grid: SweepGrid,
    dim: int,
    parameters: dict[str, Any],
) -> SupReport:
    """sup of ratio(x, y) over the grid levels and over one extra near-diagonal level.

    A non-finite ratio makes the sup infinite, which fails the report.
    """
    base = grid.levels(dim)
    refined = grid.levels(dim, min(grid.depth + 1, len(grid.gaps)))
    sup = sup_refined = 0.0
    worst: dict[str, Any] = {}
    for level, pairs in refined.items():
        for x, y in pairs:
            value = float(ratio(np.asarray(x), np.asarray(y)))
            if not math.isfinite(value):
                logger.warning("%s is %s at x=%s, y=%s", name, value, list(x), list(y))
                value = math.inf
            if value > sup_refined or not worst:
                sup_refined = value
                worst = {"x": list(x), "y": list(y), "level": level, "value": value}
            if level in base:
                sup = max(sup, value)
    logger.debug("%s: sup %s, refined %s", name, sup, sup_refined)
    return SupReport(
        name=name, parameters=parameters, sup=sup, sup_refined=sup_refined, worst=worst
    )


def _ball(alpha: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    return float(ball_measure_fast(alpha, x, float(np.linalg.norm(x - y))))


# -- integrals of q_+ against Pi ----------------------------------------------------------


def lemma21_ratios(
    alpha: AlphaLike, xi: Sequence[float], kappa: Sequence[float], x: Any, y: Any
) -> tuple[float, float]:
    """Both normalized Pi_(alpha+xi+kappa) integrals of negative powers of q_+ at (x, y)."""
    alpha = as_alpha(alpha)
    d = alpha.size
    xi = np.asarray(xi, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    x, y = as_point(x, d), as_point(y, d)
    rule = ProductRule(tuple(pi_measure_graded_rule(float(nu)) for nu in alpha + xi + kappa))
    s, log_w = rule.log_tensor()
    rest = y * y * (1.0 - s * s)
    log_q = np.log(np.sum((x + y * s) ** 2 + rest, axis=-1))
    power = d + alpha.sum() + xi.sum()
    gap = float(np.linalg.norm(x - y))
    log_front = float(2.0 * xi @ np.log(x + y)) + math.log(_ball(alpha, x, y))
    first = log_front + special.logsumexp(-power * log_q + log_w)
    second = log_front + math.log(gap) + special.logsumexp(-(power + 0.5) * log_q + log_w)
    return math.exp(first), math.exp(second)


def lemma21_check(
    alpha: AlphaLike,
    xi: Sequence[float],
    kappa: Sequence[float],
    grid: SweepGrid | None = None,
) -> dict[str, SupReport]:
    alpha = as_alpha(alpha)
    xi = np.asarray(xi, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if xi.shape != alpha.shape or kappa.shape != alpha.shape:
        raise DomainError("xi and kappa must have the dimension of alpha")
    if np.any(xi < 0.0) or np.any(kappa < 0.0):
        raise DomainError(f"xi and kappa must be nonnegative, got {xi.tolist()}, {kappa.tolist()}")
    if np.any(alpha + xi + kappa < -0.5):
        raise DomainError("need alpha + xi + kappa in [-1/2, inf)^d")
    grid = grid or SweepGrid()
    parameters = {"alpha": alpha.tolist(), "xi": xi.tolist(), "kappa": kappa.tolist()}
    cache: dict[tuple, tuple[float, float]] = {}

    def both(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
        key = (tuple(x), tuple(y))
        if key not in cache:
            cache[key] = lemma21_ratios(alpha, xi, kappa, x, y)
        return cache[key]

    return {
        "first": _grid_sup(
            "q_plus_integral", lambda x, y: both(x, y)[0], grid, alpha.size, parameters
        ),
        "second": _grid_sup(
            "q_plus_integral_half_power", lambda x, y: both(x, y)[1], grid, alpha.size, parameters
        ),
    }


def lemma23_ratio(a: float, b: float, lam: float, A: float, B: float) -> float:
    """[integral of Pi_(a+b)(ds) / (A - B s)^(a + 1/2 + lam)] * A^(a + 1/2) * (A - B)^lam."""
    if not A > B > 0.0:
        raise DomainError(f"need A > B > 0, got A={A}, B={B}")
    rule = pi_measure_graded_rule(a + b)
    exponent = a + 0.5 + lam
    log_integral = special.logsumexp(-exponent * np.log(A - B * rule.nodes) + rule.log_weights)
    return math.exp(log_integral + (a + 0.5) * math.log(A) + lam * math.log(A - B))


def lemma23_check(
    a: float,
    b: float,
    lam: float,
    A_values: Sequence[float] = (1.0, 10.0, 100.0),
    ratios: Sequence[float] = (0.1, 0.5, 0.9, 0.99, 0.999),
) -> SupReport:
    """sup over A and B / A; the refinement adds midpoints and B / A = 0.9999."""
    if a < -0.5 or b < 0.0 or not lam > 0.0:
        raise DomainError(f"need a >= -1/2, b >= 0 and lam > 0, got {a}, {b}, {lam}")

    def sup_over(As: Sequence[float], rs: Sequence[float]) -> tuple[float, dict]:
        best, where = 0.0, {}
        for A in As:
            for r in rs:
                value = lemma23_ratio(a, b, lam, A, r * A)
                if value > best:
                    best, where = value, {"A": A, "B": r * A, "value": value}
        return best, where

    refined_A = sorted({*A_values, *(math.sqrt(p * q) for p, q in zip(A_values, A_values[1:]))})
    refined_r = sorted({*ratios, *((p + q) / 2.0 for p, q in zip(ratios, ratios[1:])), 0.9999})
    sup, where = sup_over(A_values, ratios)
    sup_refined, where_refined = sup_over(refined_A, refined_r)
    small = lemma23_ratio(a, b, lam, A_values[0], 1e-8 * A_values[0])
    return SupReport(
        name="pi_power_integral",
        parameters={"a": a, "b": b, "lam": lam},
        sup=sup,
        sup_refined=max(sup, sup_refined),
        worst=where_refined if sup_refined > sup else where,
        details={"small_B_ratio": small, "total_mass": pi_total_mass(a + b)},
    )


# -- zeta integral ------------------------------------------------------------------------


def _log_log_zeta(w: np.ndarray) -> np.ndarray:
    """log of Log(zeta) = log((1 + zeta) / (1 - zeta)) at zeta = e^-w."""
    return np.log(np.log1p(np.exp(-w)) - np.log(-np.expm1(-w)))


def lemma28_log_value(a: float, b: float, M: float, T: float, rel_tol: float = 1e-12) -> float:
    """log of T^(a-1) times the integral over (0, 1) of
    Log(zeta)^M (1 - zeta^2)^(b-1) zeta^(-a-M) e^(-T/zeta) d zeta.

    With zeta = e^-w the integrand near w = 0 carries w^(b-1); there w = r^(1/b) removes
    the endpoint singularity.
    """
    if not (a > 1.0 and b > 0.0 and T > 0.0):
        raise DomainError(f"need a > 1, b > 0 and T > 0, got a={a}, b={b}, T={T}")

    def log_integrand(w: np.ndarray) -> np.ndarray:
        zeta = np.exp(-w)
        u = T / zeta
        return (
            M * (_log_log_zeta(w) - math.log(T))
            + (b - 1.0) * np.log(-np.expm1(-2.0 * w))
            + (a + M - 1.0) * np.log(u)
            - (u - T)
        )

    def near(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        positive = r > 0.0
        w = r[positive] ** (1.0 / b)
        out[positive] = np.exp(log_integrand(w) + (1.0 / b - 1.0) * np.log(r[positive])) / b
        return out

    def far(w: np.ndarray) -> np.ndarray:
        return np.exp(log_integrand(np.asarray(w, dtype=float)))

    u_max = T + 80.0 + 4.0 * abs(a + M)
    w_split = min(1.0, math.log(u_max / T))
    first, _ = adaptive_quad(near, 0.0, w_split**b, 1e-300, rel_tol=rel_tol)
    total = float(first)
    if math.log(u_max / T) > w_split:
        second, _ = adaptive_quad(far, w_split, math.log(u_max / T), 1e-300, rel_tol=rel_tol)
        total += float(second)
    return math.log(total) - T


def lemma28_check(
    a: float, b: float, M: float, T_values: Sequence[float] | None = None
) -> SupReport:
    """sup over T of the normalized zeta integral; the refinement doubles the T grid."""
    if not (a > 1.0 and b > 0.0):
        raise DomainError(f"need a > 1 and b > 0, got a={a}, b={b}")
    T_values = list(T_values) if T_values is not None else list(np.geomspace(1e-3, 1e3, 13))
    refined_T = sorted({*T_values, *(math.sqrt(p * q) for p, q in zip(T_values, T_values[1:]))})
    values = {T: math.exp(lemma28_log_value(a, b, M, T)) for T in refined_T}
    sup = max(values[T] for T in T_values)
    T_worst = max(values, key=values.get)
    tail = [values[T] for T in refined_T if T >= 10.0]
    return SupReport(
        name="zeta_integral",
        parameters={"a": a, "b": b, "M": M},
        sup=sup,
        sup_refined=max(values.values()),
        worst={"T": T_worst, "value": values[T_worst]},
        details={"decays_beyond_10": all(p >= q for p, q in zip(tail, tail[1:]))},
    )


# -- the L^p(t^(W-1) dt) bound ------------------------------------------------------------


def _check_lemma29(
    alpha: np.ndarray,
    eps: np.ndarray,
    theta: np.ndarray,
    rho: np.ndarray,
    u: float,
    p: float,
    C: float,
) -> None:
    if eps.shape != alpha.shape or theta.shape != alpha.shape or rho.shape != alpha.shape:
        raise DomainError("eps, theta and rho must have the dimension of alpha")
    if not np.all(np.isin(eps, (0, 1))):
        raise DomainError(f"eps must lie in {{0, 1}}^d, got {eps.tolist()}")
    if np.any(theta < 0) or np.any(rho < 0) or np.any(theta > 2 * eps) or np.any(rho > 2 * eps):
        raise DomainError("need 0 <= theta <= 2 eps and 0 <= rho <= 2 eps")
    if u < 0.0 or not p >= 1.0 or not C > 0.0:
        raise DomainError(f"need u >= 0, p >= 1 and C > 0, got u={u}, p={p}, C={C}")


def _log_pu(
    alpha: np.ndarray,
    eps: np.ndarray,
    theta: np.ndarray,
    rho: np.ndarray,
    u: float,
    p: float,
    W: float,
    C: float,
    x: np.ndarray,
    y: np.ndarray,
    t: np.ndarray,
) -> np.ndarray:
    """log p_u(x, y, zeta(t)) for a vector of t."""
    t = np.asarray(t, dtype=float)
    d = alpha.size
    D = d + alpha.sum() + 2 * eps.sum()
    decay = np.exp(-2.0 * t)
    log_sech2 = math.log(4.0) - 2.0 * t - 2.0 * np.log1p(decay)
    log_zeta = np.log(-np.expm1(-2.0 * t)) - np.log1p(decay)
    zeta = np.exp(log_zeta)
    w_over_p = 0.0 if math.isinf(p) else W / p
    power = -D + theta.sum() / 2.0 + rho.sum() / 2.0 - w_over_p - u / 2.0
    out = D * log_sech2 + power * log_zeta
    out = out + float((2 * eps - theta) @ np.log(x) + (2 * eps - rho) @ np.log(y))
    for i in range(d):
        rule = pi_measure_graded_rule(float(alpha[i] + 1.0 + eps[i]))
        s = rule.nodes
        rest = y[i] ** 2 * (1.0 - s * s)
        q_plus = (x[i] + y[i] * s) ** 2 + rest
        q_minus = (x[i] - y[i] * s) ** 2 + rest
        exponent = -C * (q_plus / (4.0 * zeta[:, None]) + zeta[:, None] * q_minus / 4.0)
        out = out + special.logsumexp(exponent + rule.log_weights, axis=-1)
    return out


def _lemma29_window(alpha: np.ndarray, eps: np.ndarray, gap: float) -> TWindow:
    D = alpha.size + alpha.sum() + 2 * eps.sum()
    return TWindow(min(1e-6, gap * gap / 1000.0), math.log(1.0 / settings.ENVELOPE_CUTOFF) / D)


def lemma29_norm(
    alpha: AlphaLike,
    eps: Sequence[int],
    theta: Sequence[int],
    rho: Sequence[int],
    u: float,
    p: float,
    W: float,
    C: float,
    x: Any,
    y: Any,
) -> float:
    """||p_u(x, y, zeta(t))|| in L^p(t^(W-1) dt); p = inf is the sup over t."""
    alpha = as_alpha(alpha)
    eps, theta, rho = (np.asarray(v, dtype=int) for v in (eps, theta, rho))
    _check_lemma29(alpha, eps, theta, rho, u, p, C)
    x, y = as_point(x, alpha.size), as_point(y, alpha.size)
    window = _lemma29_window(alpha, eps, float(np.linalg.norm(x - y)))

    def log_profile(t: np.ndarray) -> np.ndarray:
        return _log_pu(alpha, eps, theta, rho, u, p, W, C, x, y, np.atleast_1d(t))

    if math.isinf(p):
        return refined_sup(lambda t: np.exp(log_profile(t)), window)[0]
    rule = t_weighted_grid(W, window.t_min, window.t_max, window.panels)
    return math.exp(special.logsumexp(p * log_profile(rule.nodes) + rule.log_weights) / p)


def lemma29_check(
    alpha: AlphaLike,
    eps: Sequence[int],
    theta: Sequence[int],
    rho: Sequence[int],
    u: float = 0.0,
    p: float = math.inf,
    W: float = 1.0,
    C: float = 1.0,
    grid: SweepGrid | None = None,
) -> SupReport:
    """sup over the grid of ||p_u|| * |x - y|^u * mu(B(x, |x - y|))."""
    alpha = as_alpha(alpha)
    _check_lemma29(alpha, *(np.asarray(v, dtype=int) for v in (eps, theta, rho)), u, p, C)
    grid = grid or SweepGrid()

    def ratio(x: np.ndarray, y: np.ndarray) -> float:
        norm = lemma29_norm(alpha, eps, theta, rho, u, p, W, C, x, y)
        return norm * float(np.linalg.norm(x - y)) ** u * _ball(alpha, x, y)

    parameters = {
        "alpha": alpha.tolist(),
        "eps": list(eps),
        "theta": list(theta),
        "rho": list(rho),
        "u": u,
        "p": "inf" if math.isinf(p) else p,
        "W": W,
        "C": C,
    }
    return _grid_sup("lp_time_norm", ratio, grid, alpha.size, parameters)


def lemma29_heat_sum(alpha: AlphaLike, t: float, x: Any, y: Any) -> float:
    """sum over eps of prod [2(alpha_i + 1)]^(1 - eps_i) 2^-(d + |alpha| + 2|eps|) p_0^(eps).

    With u = 0, p = inf and C = 1 this is the heat kernel G_t(x, y).
    """
    alpha = as_alpha(alpha)
    d = alpha.size
    x, y = as_point(x, d), as_point(y, d)
    zero = np.zeros(d, dtype=int)
    terms = []
    for eps in itertools.product((0, 1), repeat=d):
        eps = np.asarray(eps, dtype=int)
        log_c = float(np.sum((1 - eps) * np.log(2.0 * (alpha + 1.0))))
        D = d + alpha.sum() + 2 * eps.sum()
        log_p0 = _log_pu(alpha, eps, zero, zero, 0.0, math.inf, 1.0, 1.0, x, y, np.array([t]))
        terms.append(log_c - D * math.log(2.0) + float(log_p0[0]))
    return math.exp(special.logsumexp(terms))
