from __future__ import annotations

import math

import numpy as np
import pytest

from src.core.exceptions import DomainError
from src.core.measure_geometry import (
    ball_measure,
    ball_measure_comparable,
    ball_measure_fast,
    ball_measure_monte_carlo,
    comparability_check,
    doubling_check,
    doubling_ratio,
    interval_measure,
    lemma211_sample,
    mu_density,
    random_triples,
)
from src.core.models import BallSpec


def test_mu_density_and_interval_measure():
    assert mu_density((0.5,), [2.0]) == pytest.approx(4.0)
    np.testing.assert_allclose(mu_density((0.0, -0.5), [[1.0, 3.0], [2.0, 5.0]]), [1.0, 2.0])
    assert interval_measure(0.0, 1.0, 2.0) == pytest.approx(1.5)


def test_ball_measure_in_one_dimension_is_exact():
    assert ball_measure((0.0,), BallSpec.around([1.0], 0.5)) == pytest.approx(1.0, rel=1e-14)
    # ball reaching past the origin is cut at 0
    assert ball_measure((0.0,), BallSpec.around([0.5], 1.0)) == pytest.approx(1.125, rel=1e-14)


@pytest.mark.parametrize(
    ("center", "expected"),
    [
        ((2.0, 2.0), math.pi),
        ((0.5, 2.0), math.pi - (math.acos(0.5) - 0.5 * math.sqrt(0.75))),
    ],
)
def test_ball_measure_with_lebesgue_density(center, expected):
    value = ball_measure((-0.5, -0.5), BallSpec.around(center, 1.0))

    assert value == pytest.approx(expected, rel=1e-7)


def test_ball_measure_in_three_dimensions():
    value = ball_measure((-0.5, -0.5, -0.5), BallSpec.around((2.0, 2.0, 2.0), 1.0), tol=1e-7)

    assert value == pytest.approx(4.0 * math.pi / 3.0, rel=1e-6)


def test_ball_measure_rejects_unsupported_dimensions():
    with pytest.raises(DomainError):
        ball_measure((0.0, 0.0), BallSpec.around([1.0], 0.5))
    with pytest.raises(DomainError):
        ball_measure((0.0,) * 4, BallSpec.around([1.0] * 4, 0.5))


def test_monte_carlo_agrees_with_quadrature():
    alpha, ball = (0.5, 0.0), BallSpec.around((1.0, 1.0), 0.8)

    estimate = ball_measure_monte_carlo(alpha, ball, samples=200_000, seed=3)
    exact = ball_measure(alpha, ball)

    assert estimate.samples == 200_000
    assert abs(estimate.value - exact) < 5.0 * estimate.stderr


def test_ball_measure_fast_matches_quadrature():
    x = np.array([[0.3], [1.0], [4.0]])
    r = np.array([0.5, 0.1, 2.0])

    values = ball_measure_fast((1.5,), x, r)

    for xi, ri, value in zip(x, r, values):
        assert value == pytest.approx(ball_measure((1.5,), BallSpec.around(xi, ri)), rel=1e-12)


@pytest.mark.parametrize("alpha", [(-0.9,), (0.0,), (2.5,)])
def test_ball_volume_comparability_band(alpha):
    report = comparability_check(alpha)

    assert report.name == "ball_volume_comparability"
    assert report.lo > 0.0
    assert report.spread_refined <= report.max_spread
    assert report.passed


def test_comparable_measure_is_exact_for_lebesgue_density():
    ball = BallSpec.around((3.0,), 0.5)

    assert ball_measure_comparable((-0.5,), ball) == pytest.approx(0.5)
    assert ball_measure((-0.5,), ball) == pytest.approx(1.0)


def test_doubling_check_is_stable():
    report = doubling_check((0.0,))

    assert report.sup >= 2.0 - 1e-9
    assert report.finite
    assert report.passed
    assert set(report.worst) == {"x", "r"}


def test_random_triples_respect_the_geometry():
    x, y, z = random_triples(np.random.default_rng(1), 2, 500)

    assert x.shape == y.shape == z.shape == (500, 2)
    assert np.all(z > 0.0)
    assert np.all(
        np.linalg.norm(x - z, axis=-1) <= np.linalg.norm(x - y, axis=-1) / 2.0 + 1e-12
    )


@pytest.mark.parametrize("alpha", [(0.5,), (-0.5, 1.0)])
def test_ball_ratio_sample_reports_both_directions(alpha):
    report = lemma211_sample(alpha, samples=2000, seed=5)

    assert report.name == "ball_ratio_comparability"
    assert report.samples == (2000 if len(alpha) == 1 else 100)
    assert math.isfinite(report.sup_refined)
    assert report.sup_refined >= report.sup
    assert set(report.details) == {"alpha", "sup_ratio", "sup_inverse_ratio"}


@pytest.mark.parametrize("a", [-0.75, -0.9])
def test_doubling_sup_sits_where_the_large_ball_reaches_zero(a):
    # for p = 2a + 2 < 1 the ratio is scale invariant and peaks at r = x / 2
    p = 2.0 * a + 2.0
    expected = 2.0**p / (1.5**p - 0.5**p)

    report = doubling_check((a,))

    assert report.sup == pytest.approx(expected, rel=1e-6)
    assert report.sup_refined == pytest.approx(expected, rel=1e-6)
    assert report.worst["r"] == pytest.approx(report.worst["x"][0] / 2.0)
    assert report.passed


def test_doubling_ratio_at_the_corner():
    assert doubling_ratio((-0.75,), [2.0], 1.0) == pytest.approx(1.0 + math.sqrt(3.0))


def test_random_triples_on_the_boundary_sphere():
    x, y, z = random_triples(np.random.default_rng(3), 2, 200, boundary=1.0)

    assert np.linalg.norm(x - z, axis=-1) == pytest.approx(
        np.linalg.norm(x - y, axis=-1) / 2.0, rel=1e-12
    )


def test_random_triples_reject_a_bad_boundary_fraction():
    with pytest.raises(DomainError):
        random_triples(np.random.default_rng(0), 1, 10, boundary=1.5)


def test_ball_ratio_sample_resolves_the_inverse_sup():
    # d = 1, alpha = -0.9: the inverse ratio peaks at y = 2x with z = 1.5x
    p = 0.2
    expected = 2.0 * 2.0**p / (2.0**p - 1.0)

    report = lemma211_sample((-0.9,), samples=5000, seed=0)

    assert report.details["sup_inverse_ratio"] <= expected * (1.0 + 1e-9)
    assert report.details["sup_inverse_ratio"] == pytest.approx(expected, rel=0.03)
    assert report.passed
