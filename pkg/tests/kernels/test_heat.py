from __future__ import annotations

import math

import numpy as np
import pytest

from src.core.exceptions import DomainError, TruncationError
from src.core.kernels.heat import (
    envelope_bound,
    exp_form,
    heat_kernel_closed,
    heat_kernel_schlafli,
    heat_kernel_schlafli_symmetric,
    heat_kernel_spectral,
    heat_spectral_order,
    kernel_derivative,
    lemma27_sample,
    lemma210_sample,
    log_heat_kernel_closed,
    poisson_kernel,
    poisson_kernel_derivative,
    poisson_kernel_spectral,
    q_forms,
    t_of_zeta,
    zeta_of_t,
)
from src.core.numdiff import richardson_derivative
from src.core.special_fn import apply_laguerre_operator


def _mehler(t: float, x: float, y: float) -> float:
    """Hermite heat kernel on the line."""
    sinh = math.sinh(2.0 * t)
    coth = 1.0 / math.tanh(2.0 * t)
    return (2.0 * math.pi * sinh) ** -0.5 * math.exp(-coth * (x * x + y * y) / 2.0 + x * y / sinh)


@pytest.mark.parametrize("t", [0.05, 0.5, 3.0])
@pytest.mark.parametrize(("x", "y"), [(0.3, 0.3), (0.2, 1.7), (2.5, 1.0)])
def test_closed_form_reduces_to_even_mehler_kernel(t, x, y):
    expected = _mehler(t, x, y) + _mehler(t, x, -y)

    assert heat_kernel_closed((-0.5,), t, [x], [y]) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("alpha", [(0.7,), (-0.9,), (0.0, 2.5)])
def test_large_time_keeps_only_the_ground_state(alpha):
    t = 20.0
    x = np.full(len(alpha), 0.8)
    y = np.full(len(alpha), 1.3)
    a = np.asarray(alpha)
    ground = np.prod(2.0 / np.array([math.gamma(ai + 1.0) for ai in a]))
    log_expected = (
        -t * (2.0 * a.sum() + 2.0 * a.size) + math.log(ground) - (x @ x + y @ y) / 2.0
    )

    assert log_heat_kernel_closed(alpha, t, x, y) == pytest.approx(log_expected, rel=1e-10)


@pytest.mark.parametrize(
    ("alpha", "t", "x", "y"),
    [
        ((0.5,), 0.5, (0.7,), (1.3,)),
        ((-0.9,), 1.0, (0.2,), (2.0,)),
        ((-0.3, 1.0), 1.0, (0.6, 1.5), (1.1, 0.4)),
    ],
)
def test_closed_form_matches_eigen_series(alpha, t, x, y):
    series = heat_kernel_spectral(alpha, t, x, y)

    assert series.value == pytest.approx(heat_kernel_closed(alpha, t, x, y), rel=1e-10)
    assert series.shells.sum() == pytest.approx(series.value)
    assert series.k_max == heat_spectral_order(t)


@pytest.mark.parametrize("alpha", [(-0.9,), (0.0,), (2.5,), (-0.5, 0.5)])
@pytest.mark.parametrize(("t", "graded"), [(0.5, False), (0.05, True)])
def test_closed_form_matches_schlafli_form(alpha, t, graded):
    x = np.linspace(0.8, 1.2, len(alpha))
    y = np.linspace(1.1, 0.7, len(alpha))

    value = heat_kernel_schlafli(alpha, t, x, y, graded=graded)

    assert value == pytest.approx(heat_kernel_closed(alpha, t, x, y), rel=1e-9)


@pytest.mark.parametrize("alpha", [(-0.5,), (0.5,), (1.0, 3.0)])
def test_symmetric_schlafli_form(alpha):
    x = np.full(len(alpha), 0.9)
    y = np.full(len(alpha), 1.4)

    value = heat_kernel_schlafli_symmetric(alpha, 0.7, x, y)

    assert value == pytest.approx(heat_kernel_closed(alpha, 0.7, x, y), rel=1e-9)


def test_symmetric_schlafli_form_needs_alpha_above_minus_one_half():
    with pytest.raises(DomainError):
        heat_kernel_schlafli_symmetric((-0.7,), 0.7, [1.0], [1.0])


def test_closed_form_broadcasts_over_points_and_times():
    x = np.array([[0.5], [1.0], [2.0]])
    y = np.array([[1.0], [1.0], [0.3]])
    t = np.array([0.1, 1.0, 4.0])

    values = heat_kernel_closed((0.2,), t, x, y)

    assert values.shape == (3,)
    assert values[1] == pytest.approx(heat_kernel_closed((0.2,), 1.0, [1.0], [1.0]))


@pytest.mark.parametrize("t", [1e-9, 1e-12, 1e-15])
@pytest.mark.parametrize("alpha", [(-0.9,), (0.0,), (2.5,)])
@pytest.mark.parametrize(("x", "y"), [(1.0, 1.0), (1.0, 1.5), (2.0, 2.0001)])
def test_small_time_closed_form_is_the_gaussian_limit(alpha, t, x, y):
    a = alpha[0]
    gauss = (x - y) ** 2 / (4 * t)
    expected = -0.5 * math.log(4 * math.pi * t) - (a + 0.5) * math.log(x * y) - gauss

    log_value = log_heat_kernel_closed(alpha, t, [x], [y])

    assert math.isfinite(log_value)
    assert log_value == pytest.approx(expected, rel=1e-8, abs=1e-6)
    assert not math.isnan(heat_kernel_closed(alpha, t, [x], [y]))


def test_small_time_derivatives_stay_finite():
    for n, m in [(None, 1), ((1,), 0)]:
        value = kernel_derivative((0.0,), 1e-12, [1.0], [1.5], n, m)
        assert math.isfinite(value)


@pytest.mark.parametrize("t", [0.0, -1.0, math.inf])
def test_kernels_reject_nonpositive_time(t):
    with pytest.raises(DomainError):
        heat_kernel_closed((0.0,), t, [1.0], [1.0])
    with pytest.raises(DomainError):
        heat_kernel_spectral((0.0,), t, [1.0], [1.0])


def test_kernels_reject_points_off_the_cone():
    with pytest.raises(DomainError):
        heat_kernel_closed((0.0,), 1.0, [0.0], [1.0])
    with pytest.raises(DomainError):
        heat_kernel_closed((0.0, 0.0), 1.0, [1.0], [1.0, 1.0])


def test_eigen_series_reports_truncation():
    with pytest.raises(TruncationError) as excinfo:
        heat_kernel_spectral((0.0,), 0.05, [1.0], [1.2], K_max=2, tol=1e-10)

    assert excinfo.value.partial_sum == excinfo.value.best_estimate
    assert excinfo.value.last_shell > 1e-10


def test_eigen_series_without_tolerance_returns_partial_sum():
    series = heat_kernel_spectral((0.0,), 0.05, [1.0], [1.2], K_max=2)

    assert series.k_max == 2
    assert series.shells.shape == (3,)


@pytest.mark.parametrize(("t", "expected"), [(1.0, 9), (0.01, 100)])
def test_heat_spectral_order_is_capped(t, expected):
    assert heat_spectral_order(t) == expected


@pytest.mark.parametrize("t", [1e-6, 0.3, 5.0, 30.0])
def test_zeta_round_trip(t):
    z = zeta_of_t(t)

    assert t_of_zeta(z.zeta, z.complement).t == pytest.approx(t, rel=1e-12)
    assert z.complement == pytest.approx(2.0 / (math.exp(2.0 * t) + 1.0), rel=1e-12)


@pytest.mark.parametrize("zeta", [0.0, 1.0, 1.5])
def test_t_of_zeta_rejects_out_of_range(zeta):
    with pytest.raises(DomainError):
        t_of_zeta(zeta)


def test_q_forms_and_exp_form():
    x, y, s = np.array([1.0, 2.0]), np.array([0.5, 1.5]), np.array([1.0, -0.5])

    q = q_forms(x, y, s)

    assert q.q_plus == pytest.approx(5.0 + 2.5 + 2.0 * (0.5 - 1.5))
    assert q.q_minus == pytest.approx(5.0 + 2.5 - 2.0 * (0.5 - 1.5))
    assert exp_form(0.5, 4.0, 8.0) == pytest.approx(math.exp(-2.0 - 1.0))


def test_q_forms_reject_s_outside_the_cube():
    with pytest.raises(DomainError):
        q_forms([1.0], [1.0], [1.5])


@pytest.mark.parametrize(("alpha", "t"), [((0.5,), 0.4), ((-0.9,), 1.5)])
def test_time_derivative_matches_finite_differences(alpha, t):
    x, y = [0.9], [1.3]
    expected = richardson_derivative(lambda s: heat_kernel_closed(alpha, s, x, y), t, 1e-3)

    assert kernel_derivative(alpha, t, x, y, m=1) == pytest.approx(expected, rel=1e-7)


def test_delta_derivative_matches_finite_differences():
    alpha, t, y = (0.3, 1.2), 0.6, [1.0, 0.7]
    x = np.array([0.8, 1.1])

    def along_second(v):
        return heat_kernel_closed(alpha, t, [0.8, v], y)

    expected = richardson_derivative(along_second, 1.1, 1e-3) + 1.1 * along_second(1.1)

    assert kernel_derivative(alpha, t, x, y, n=(0, 1)) == pytest.approx(expected, rel=1e-7)


def test_heat_equation_holds():
    alpha, t, x, y = (0.4,), 0.8, [1.1], [0.6]

    dt = kernel_derivative(alpha, t, x, y, m=1)
    generator = apply_laguerre_operator(
        lambda p: heat_kernel_closed(alpha, t, p, y), alpha, x, h=1e-3
    )

    assert dt == pytest.approx(-generator, rel=1e-4)


def test_second_order_derivatives_compose_first_order_ones():
    alpha, t, x, y = (0.5,), 0.5, 1.2, [0.9]

    def delta_one(v):
        return kernel_derivative(alpha, t, [v], y, n=(1,))

    expected = richardson_derivative(delta_one, x, 1e-3) + x * delta_one(x)

    assert kernel_derivative(alpha, t, [x], y, n=(2,)) == pytest.approx(expected, rel=1e-5)


def test_derivative_order_is_limited():
    with pytest.raises(DomainError):
        kernel_derivative((0.0,), 1.0, [1.0], [1.0], n=(3,), m=1)


@pytest.mark.parametrize("alpha", [(0.5,), (-0.5,)])
def test_poisson_subordination_matches_eigen_series(alpha):
    t, x, y = 1.0, [0.8], [1.1]

    series = poisson_kernel_spectral(alpha, t, x, y)

    assert poisson_kernel(alpha, t, x, y) == pytest.approx(series.value, rel=1e-7)


def test_poisson_time_derivative_matches_finite_differences():
    alpha, t, x, y = (0.5,), 0.8, [0.9], [1.2]
    expected = richardson_derivative(lambda s: poisson_kernel(alpha, s, x, y, 1e-12), t, 1e-3)

    value = poisson_kernel_derivative(alpha, t, x, y, m=1)

    assert value == pytest.approx(expected, rel=1e-5)


def test_poisson_derivative_order_is_limited():
    with pytest.raises(DomainError):
        poisson_kernel_derivative((0.0,), 1.0, [1.0], [1.0], n=(1,), m=1)


def test_pointwise_bounds_sample():
    reports = lemma27_sample((0.0,), samples=500, seed=1, b=1.0, c=1.0)

    assert set(reports) == set("abcde")
    assert reports["a"].violations == 0
    assert reports["a"].passed
    assert reports["b"].expected == pytest.approx(1.0 / math.e)
    assert reports["b"].passed
    assert all(report.name == f"pointwise_bound_{item}" for item, report in reports.items())


def test_pointwise_bound_d_reaches_its_envelope():
    # on y = x, s = -1 item d is 4u exp(-u^2) with u = x sqrt(zeta)
    bound = envelope_bound(1.0, 1.0)

    report = lemma27_sample((0.0,), samples=500, seed=1, b=1.0, c=1.0)["d"]

    assert bound == pytest.approx(4.0 * math.exp(-0.5) / math.sqrt(2.0))
    assert report.details["envelope_bound"] == bound
    assert report.sup_refined <= bound * (1.0 + 1e-9)
    assert report.sup_refined == pytest.approx(bound, rel=0.02)
    assert report.passed


def test_pointwise_bound_c_reaches_its_envelope():
    # on y = x, s = 1 item c is 4v exp(-v^2) with v = x / sqrt(zeta)
    bound = envelope_bound(1.0, 1.0)

    report = lemma27_sample((0.0,), samples=500, seed=1, b=1.0, c=1.0)["c"]

    assert report.details["envelope_bound"] == pytest.approx(bound)
    assert report.sup_refined <= bound * (1.0 + 1e-9)
    assert report.sup_refined == pytest.approx(bound, rel=0.02)
    assert report.passed


def test_pointwise_bounds_sample_validates_exponents():
    with pytest.raises(DomainError):
        lemma27_sample((0.0,), samples=10, b=1.0, c=0.0)


@pytest.mark.parametrize("dim", [1, 2])
def test_q_form_comparability_sample(dim):
    report = lemma210_sample(dim, samples=500, seed=2)

    assert report.violations == 0
    assert report.sup_refined <= 4.0
    assert report.passed
