"""The measure mu_alpha, its ball measures and the ball-volume comparison quantity."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from src.core.exceptions import DomainError
from src.core.models import AlphaLike, BallSpec, as_alpha, as_points
from src.core.quadrature import adaptive_integrate
from src.core.reports import BandReport, SampleReport, SupReport

logger = logging.getLogger(__name__)

# Sample count divisor for the ball-ratio check when ball measures need quadrature.
QUADRATURE_SAMPLE_DIVISOR = 20
_MIN_QUADRATURE_SAMPLES = 100


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    samples: int
    seed: int


def mu_density(alpha: AlphaLike, x: Sequence[float] | np.ndarray) -> float | np.ndarray:
    """prod_i x_i^(2 alpha_i + 1); x may carry leading batch axes."""
    alpha = as_alpha(alpha)
    x = as_points(x, alpha.size)
    value = np.prod(x ** (2.0 * alpha + 1.0), axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def interval_measure(a: float, lo: np.ndarray | float, hi: np.ndarray | float) -> np.ndarray:
    """Integral of u^(2a+1) du over [lo, hi] with 0 <= lo <= hi."""
    power = 2.0 * a + 2.0
    return (np.asarray(hi, dtype=float) ** power - np.asarray(lo, dtype=float) ** power) / power


def _section_measure(
    alpha: np.ndarray, center: np.ndarray, radius: np.ndarray, tol: float
) -> np.ndarray:
    """mu_alpha of the ball section B(center, radius) in R_+^k, vectorized over radius."""
    radius = np.asarray(radius, dtype=float)
    if alpha.size == 1:
        lo = np.maximum(center[0] - radius, 0.0)
        hi = center[0] + radius
        return np.where(radius > 0.0, interval_measure(alpha[0], lo, hi), 0.0)

    def one(r: float) -> float:
        if r <= 0.0:
            return 0.0
        c0 = center[0]

        def integrand(u: np.ndarray) -> np.ndarray:
            rho = np.sqrt(np.maximum(r * r - (u - c0) ** 2, 0.0))
            inner = _section_measure(alpha[1:], center[1:], rho, tol)
            return u ** (2.0 * alpha[0] + 1.0) * inner

        return adaptive_integrate(integrand, max(c0 - r, 0.0), c0 + r, 1e-300, rel_tol=tol)

    return np.vectorize(one, otypes=[float])(radius)


def ball_measure(alpha: AlphaLike, ball: BallSpec, tol: float = 1e-8) -> float:
    """mu_alpha(B(x, r) intersected with R_+^d), to relative tolerance tol.

    The innermost coordinate is integrated exactly; outer ones adaptively over
    the circle/sphere sections.
    """
    alpha = as_alpha(alpha)
    center = ball.center_array()
    if center.size != alpha.size:
        raise DomainError(f"ball lives in R^{center.size}, alpha in R^{alpha.size}")
    if alpha.size > 3:
        raise DomainError("quadrature mode supports d <= 3; use ball_measure_monte_carlo")
    return float(_section_measure(alpha, center, np.asarray(ball.radius), tol))


def ball_measure_monte_carlo(
    alpha: AlphaLike, ball: BallSpec, samples: int = 10**6, seed: int = 0, chunk: int = 10**6
) -> MonteCarloEstimate:
    """Uniform sampling of the bounding box of B(x, r) in R_+^d weighted by the density."""
    alpha = as_alpha(alpha)
    center = ball.center_array()
    r = ball.radius
    lo = np.maximum(center - r, 0.0)
    hi = center + r
    volume = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    total = total_sq = 0.0
    remaining = samples
    while remaining > 0:
        n = min(chunk, remaining)
        points = lo + (hi - lo) * rng.random((n, alpha.size))
        inside = np.sum((points - center) ** 2, axis=-1) < r * r
        with np.errstate(divide="ignore"):
            g = np.where(inside, np.prod(points ** (2.0 * alpha + 1.0), axis=-1), 0.0)
        total += float(g.sum())
        total_sq += float((g * g).sum())
        remaining -= n
    mean = total / samples
    variance = max(total_sq / samples - mean * mean, 0.0)
    return MonteCarloEstimate(
        value=volume * mean,
        stderr=volume * math.sqrt(variance / samples),
        samples=samples,
        seed=seed,
    )


def comparable_measure(alpha: AlphaLike, x: np.ndarray, r: np.ndarray | float) -> np.ndarray:
    """r^d prod (x_i + r)^(2 alpha_i + 1), vectorized over leading axes of x and r."""
    alpha = as_alpha(alpha)
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    return r**alpha.size * np.prod((x + r[..., None]) ** (2.0 * alpha + 1.0), axis=-1)


def ball_measure_comparable(alpha: AlphaLike, ball: BallSpec) -> float:
    return float(comparable_measure(alpha, ball.center_array(), ball.radius))


def ball_measure_fast(alpha: AlphaLike, x: np.ndarray, r: np.ndarray | float) -> np.ndarray:
    """Exact in d = 1 (vectorized); quadrature ball measures in d = 2, 3."""
    alpha = as_alpha(alpha)
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if alpha.size == 1:
        return interval_measure(alpha[0], np.maximum(x[..., 0] - r, 0.0), x[..., 0] + r)
    flat_x = x.reshape(-1, alpha.size)
    flat_r = np.broadcast_to(r, x.shape[:-1]).ravel()
    values = [
        ball_measure(alpha, BallSpec.around(xi, ri), tol=1e-7) for xi, ri in zip(flat_x, flat_r)
    ]
    return np.asarray(values).reshape(x.shape[:-1])


def _log_refine(values: Sequence[float]) -> list[float]:
    """Insert geometric midpoints between consecutive grid values."""
    ordered = sorted(values)
    refined = list(ordered)
    for a, b in zip(ordered[:-1], ordered[1:]):
        refined.append(math.sqrt(a * b))
    return sorted(refined)


def _center_grid(coordinate_values: Sequence[float], dim: int) -> list[tuple[float, ...]]:
    return list(itertools.product(coordinate_values, repeat=dim))


def comparability_check(
    alpha: AlphaLike,
    coordinate_values: Sequence[float] = (0.05, 0.3, 1.0, 5.0),
    radii: Sequence[float] = (0.01, 0.1, 1.0, 10.0),
    max_spread: float = 50.0,
) -> BandReport:
    """Band of ball_measure / ball_measure_comparable over a grid and its 2x refinement."""
    alpha = as_alpha(alpha)

    def band(values: Sequence[float], rs: Sequence[float]) -> tuple[float, float]:
        ratios = []
        for center in _center_grid(values, alpha.size):
            for r in rs:
                ball = BallSpec.around(center, r)
                ratios.append(
                    ball_measure(alpha, ball, tol=1e-7) / ball_measure_comparable(alpha, ball)
                )
        return min(ratios), max(ratios)

    lo, hi = band(coordinate_values, radii)
    lo_refined, hi_refined = band(_log_refine(coordinate_values), _log_refine(radii))
    logger.debug("comparability band for alpha=%s: [%s, %s]", alpha.tolist(), lo, hi)
    return BandReport(
        name="ball_volume_comparability",
        parameters={"alpha": alpha.tolist()},
        lo=lo,
        hi=hi,
        lo_refined=min(lo, lo_refined),
        hi_refined=max(hi, hi_refined),
        max_spread=max_spread,
    )


def doubling_ratio(alpha: AlphaLike, center: Sequence[float], r: float) -> float:
    """mu(B(x, 2r)) / mu(B(x, r))."""
    alpha = as_alpha(alpha)
    small = ball_measure(alpha, BallSpec.around(center, r), tol=1e-7)
    large = ball_measure(alpha, BallSpec.around(center, 2.0 * r), tol=1e-7)
    return large / small


def _doubling_sup(
    alpha: np.ndarray, center: Sequence[float], radii: Sequence[float]
) -> tuple[float, float]:
    """Max over r of the doubling ratio at one center.

    The candidates are the radii plus r = x_i / 2 and r = x_i, where B(x, 2r) and
    B(x, r) first touch the boundary of the cone; the ratio has a corner there when
    alpha_i < -1/2. A bounded search around the best candidate finishes the job.
    """
    candidates = sorted({*radii, *(c / 2.0 for c in center), *center})
    values = [doubling_ratio(alpha, center, r) for r in candidates]
    i = int(np.argmax(values))
    lo, hi = candidates[max(i - 1, 0)], candidates[min(i + 1, len(candidates) - 1)]
    if hi > lo:
        result = optimize.minimize_scalar(
            lambda s: -doubling_ratio(alpha, center, math.exp(s)),
            bounds=(math.log(lo), math.log(hi)),
            method="bounded",
            options={"xatol": 1e-8},
        )
        if -result.fun > values[i]:
            return float(-result.fun), float(math.exp(result.x))
    return float(values[i]), float(candidates[i])


def doubling_check(
    alpha: AlphaLike,
    coordinate_values: Sequence[float] = (0.05, 0.3, 1.0, 5.0),
    radii: Sequence[float] = (0.01, 0.1, 1.0, 10.0),
) -> SupReport:
    """sup of mu(B(x, 2r)) / mu(B(x, r)) over a grid and its refinement.

    At every center the sup over r is resolved, so refinement only moves the centers.
    """
    alpha = as_alpha(alpha)

    def worst(values: Sequence[float], rs: Sequence[float]) -> tuple[float, dict]:
        best, where = 0.0, {}
        for center in _center_grid(values, alpha.size):
            value, r = _doubling_sup(alpha, center, rs)
            if value > best:
                best, where = value, {"x": list(center), "r": r}
        return best, where

    sup, where = worst(coordinate_values, radii)
    sup_refined, where_refined = worst(_log_refine(coordinate_values), _log_refine(radii))
    return SupReport(
        name="doubling",
        parameters={"alpha": alpha.tolist()},
        sup=sup,
        sup_refined=max(sup, sup_refined),
        worst=where_refined if sup_refined > sup else where,
    )


def random_triples(
    rng: np.random.Generator, dim: int, n: int, boundary: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """x, y log-uniform in [0.05, 5]^d and z with |x - z| < |x - y| / 2, all in R_+^d.

    A fraction `boundary` of the triples puts z on the sphere |x - z| = |x - y| / 2,
    where continuous functions of z reach their extremes over the closed ball.
    """
    if not 0.0 <= boundary <= 1.0:
        raise DomainError(f"boundary fraction must lie in [0, 1], got {boundary}")
    xs, ys, zs = [], [], []
    count = 0
    while count < n:
        m = 2 * (n - count) + 16
        x = np.exp(rng.uniform(math.log(0.05), math.log(5.0), (m, dim)))
        y = np.exp(rng.uniform(math.log(0.05), math.log(5.0), (m, dim)))
        direction = rng.normal(size=(m, dim))
        direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
        gap = np.linalg.norm(x - y, axis=-1)
        fraction = np.where(rng.random(m) < boundary, 0.5, rng.uniform(0.0, 0.5, m))
        z = x + (gap * fraction)[:, None] * direction
        keep = np.all(z > 0.0, axis=-1) & (gap > 0.0)
        xs.append(x[keep])
        ys.append(y[keep])
        zs.append(z[keep])
        count += int(keep.sum())
    return (
        np.concatenate(xs)[:n],
        np.concatenate(ys)[:n],
        np.concatenate(zs)[:n],
    )


def lemma211_sample(alpha: AlphaLike, samples: int = 10**5, seed: int = 0) -> SampleReport:
    """Ratio |z-y| mu(B(z,|z-y|)) / (|x-y| mu(B(x,|x-y|))) on random triples.

    Ball measures are exact in d = 1 and come from quadrature in d = 2, 3, where the
    sample count is divided by QUADRATURE_SAMPLE_DIVISOR. Half of the triples put z
    on the boundary sphere, where the ratio and its reciprocal peak. Both sups must
    be stable under 10x samples.
    """
    alpha = as_alpha(alpha)
    if alpha.size > 1:
        samples = max(samples // QUADRATURE_SAMPLE_DIVISOR, _MIN_QUADRATURE_SAMPLES)

    def extremes(n: int, rng: np.random.Generator) -> tuple[float, float]:
        x, y, z = random_triples(rng, alpha.size, n, boundary=0.5)
        near = np.linalg.norm(x - y, axis=-1)
        far = np.linalg.norm(z - y, axis=-1)
        ratio = (far * ball_measure_fast(alpha, z, far)) / (
            near * ball_measure_fast(alpha, x, near)
        )
        return float(ratio.max()), float((1.0 / ratio).max())

    rng = np.random.default_rng(seed)
    sup, inv_sup = extremes(samples, rng)
    sup_refined, inv_sup_refined = extremes(10 * samples, rng)
    logger.debug("ball ratio sups for alpha=%s: %s, %s", alpha.tolist(), sup, inv_sup)
    return SampleReport(
        name="ball_ratio_comparability",
        samples=samples,
        seed=seed,
        sup=max(sup, inv_sup),
        sup_refined=max(sup, inv_sup, sup_refined, inv_sup_refined),
        details={
            "alpha": alpha.tolist(),
            "sup_ratio": max(sup, sup_refined),
            "sup_inverse_ratio": max(inv_sup, inv_sup_refined),
        },
    )
