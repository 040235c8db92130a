from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special

from src.core.exceptions import DomainError
from src.core.numdiff import richardson_derivative
from src.core.quadrature import mu_gauss_laguerre_rule
from src.core.special_fn import (
    apply_laguerre_operator,
    bessel_i_scaled,
    bessel_ratio,
    compose_derivative,
    delta_laguerre_fn,
    delta_laguerre_table,
    faa_partitions,
    laguerre_fn,
    laguerre_fn_table,
    laguerre_norm,
    laguerre_poly,
    laguerre_table,
    log_bessel_i_scaled,
    partition_count,
)


@pytest.mark.parametrize(
    ("nu", "z"),
    [(-0.5, 0.3), (-0.9, 2.0), (0.0, 1e-3), (1.5, 40.0), (5.0, 300.0)],
)
def test_bessel_i_scaled_matches_scipy(nu, z):
    assert bessel_i_scaled(nu, z) == pytest.approx(special.ive(nu, z), rel=1e-14)


@pytest.mark.parametrize(("nu", "z"), [(-1.0, 1.0), (-2.5, 1.0), (0.5, -1e-3), (0.5, math.inf)])
def test_bessel_i_scaled_rejects_out_of_domain(nu, z):
    with pytest.raises(DomainError):
        bessel_i_scaled(nu, z)


def test_log_bessel_uses_series_where_value_underflows():
    nu, z = 0.5, 1e-200
    expected = nu * (math.log(z) - math.log(2.0)) - special.gammaln(nu + 1.0) - z

    value = log_bessel_i_scaled(nu, z)

    assert math.isfinite(value)
    assert value == pytest.approx(expected, rel=1e-12)


def test_log_bessel_accepts_log_of_an_underflowed_argument():
    log_z = -800.0
    expected = 1.5 * (log_z - math.log(2.0)) - special.gammaln(2.5)

    assert log_bessel_i_scaled(1.5, 0.0, log_z=log_z) == pytest.approx(expected, rel=1e-12)


def test_log_bessel_large_argument_asymptotics():
    z = 1e6
    assert log_bessel_i_scaled(0.0, z) == pytest.approx(-0.5 * math.log(2 * math.pi * z), rel=1e-6)


@pytest.mark.parametrize("z", [1e9, 1e10, 1e12, 1e200])
@pytest.mark.parametrize(
    ("nu", "correction"),
    [(-0.5, lambda z: 0.0), (0.5, lambda z: 0.0), (1.5, lambda z: math.log1p(-1.0 / z))],
)
def test_log_bessel_is_exact_for_half_integers_past_scipy_range(nu, correction, z):
    # exp(-z) I_{1/2}(z) and exp(-z) I_{-1/2}(z) tend to (2 pi z)^(-1/2); I_{3/2} adds (1 - 1/z)
    expected = -0.5 * math.log(2 * math.pi * z) + correction(z)

    value = log_bessel_i_scaled(nu, z)

    assert math.isfinite(value)
    assert value == pytest.approx(expected, rel=1e-12)


def test_log_bessel_accepts_log_of_an_overflowed_argument():
    log_z = 800.0

    value = log_bessel_i_scaled(0.0, math.inf, log_z=log_z)

    assert value == pytest.approx(-0.5 * (math.log(2 * math.pi) + log_z), rel=1e-12)


@pytest.mark.parametrize("nu", [-0.9, 0.0, 2.5])
def test_hankel_expansion_joins_scipy_at_the_switch(nu):
    below = log_bessel_i_scaled(nu, 0.999e8)
    above = log_bessel_i_scaled(nu, 1.001e8)

    assert above - below == pytest.approx(-0.5 * math.log(1.001 / 0.999), rel=1e-6)
    assert bessel_i_scaled(nu, 1e11) == pytest.approx(math.exp(log_bessel_i_scaled(nu, 1e11)))


@pytest.mark.parametrize("z", [0.5, 2.0, 30.0])
def test_bessel_ratio_half_integer_closed_form(z):
    # I_{3/2} / I_{1/2} = coth z - 1/z
    assert bessel_ratio(0.5, z) == pytest.approx(1.0 / math.tanh(z) - 1.0 / z, rel=1e-12)


@pytest.mark.parametrize("a", [-0.9, -0.5, 0.0, 0.7, 3.0])
def test_laguerre_table_matches_generalized_laguerre(a):
    u = np.linspace(0.0, 12.0, 25)

    table = laguerre_table(8, a, u)

    for k in range(9):
        expected = special.eval_genlaguerre(k, a, u)
        np.testing.assert_allclose(table[k], expected, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize(("k_max", "a"), [(-1, 0.0), (3, -1.0), (3, -1.5)])
def test_laguerre_table_rejects_bad_arguments(k_max, a):
    with pytest.raises(DomainError):
        laguerre_table(k_max, a, 1.0)


@pytest.mark.parametrize(("k", "a", "u"), [(0, 0.5, 2.0), (3, -0.5, 1.5), (6, 2.0, 7.0)])
def test_laguerre_poly_matches_generalized_laguerre(k, a, u):
    expected = special.eval_genlaguerre(k, a, u)

    assert laguerre_poly(k, a, u) == pytest.approx(expected, rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(
        laguerre_poly(k, a, np.array([u, 0.0])),
        [expected, special.eval_genlaguerre(k, a, 0.0)],
        rtol=1e-12,
    )


def test_laguerre_norm_formula():
    assert laguerre_norm(3, 0.5) == pytest.approx(math.sqrt(2 * 6 / math.gamma(4.5)), rel=1e-13)


@pytest.mark.parametrize("a", [-0.9, -0.5, 0.0, 2.5])
def test_laguerre_functions_are_orthonormal(a):
    k_max = 8
    rule = mu_gauss_laguerre_rule(a, k_max + 2)
    table = laguerre_fn_table(k_max, a, rule.nodes)

    gram = (table * rule.weights) @ table.T

    np.testing.assert_allclose(gram, np.eye(k_max + 1), atol=1e-10)


@pytest.mark.parametrize("k", [0, 1, 4])
def test_delta_one_matches_finite_differences(k):
    a, x0 = 0.3, 1.1

    def l_k(x):
        return laguerre_fn_table(k, a, x)[k]

    expected = richardson_derivative(l_k, x0) + x0 * l_k(x0)

    assert delta_laguerre_table(k, a, x0, 1)[k] == pytest.approx(expected, rel=1e-7, abs=1e-10)


def test_delta_two_is_delta_of_delta():
    a, k, x0 = 1.5, 3, 0.8

    def delta_one(x):
        return delta_laguerre_table(k, a, x, 1)[k]

    expected = richardson_derivative(delta_one, x0) + x0 * delta_one(x0)

    assert delta_laguerre_table(k, a, x0, 2)[k] == pytest.approx(expected, rel=1e-7, abs=1e-10)


def test_delta_laguerre_table_rejects_negative_order():
    with pytest.raises(DomainError):
        delta_laguerre_table(2, 0.0, 1.0, -1)


def test_laguerre_fn_is_a_tensor_product():
    alpha, x = (0.5, 1.0), [0.7, 1.3]
    expected = laguerre_fn_table(1, 0.5, 0.7)[1] * laguerre_fn_table(2, 1.0, 1.3)[2]

    assert laguerre_fn((1, 2), alpha, x) == pytest.approx(expected, rel=1e-14)


def test_delta_laguerre_fn_batches_points():
    points = np.array([[0.4, 0.9], [1.2, 2.0], [3.0, 0.2]])

    values = delta_laguerre_fn((2, 1), (0.0, -0.5), points, (1, 0))

    assert values.shape == (3,)
    assert values[1] == pytest.approx(delta_laguerre_fn((2, 1), (0.0, -0.5), points[1], (1, 0)))


@pytest.mark.parametrize(
    ("k", "alpha", "x"),
    [((2,), (0.5,), (0.9,)), ((1, 1), (0.0, 1.0), (0.6, 0.9))],
)
def test_laguerre_functions_are_eigenfunctions(k, alpha, x):
    eigenvalue = 4 * sum(k) + 2 * sum(alpha) + 2 * len(alpha)
    value = laguerre_fn(k, alpha, x)

    applied = apply_laguerre_operator(lambda p: laguerre_fn(k, alpha, p), alpha, x, h=1e-3)

    assert applied == pytest.approx(eigenvalue * value, abs=1e-4 * eigenvalue)


def test_faa_partitions_of_three():
    assert faa_partitions(3) == {(3, 0, 0), (1, 1, 0), (0, 0, 1)}


@pytest.mark.parametrize("N", range(1, 11))
def test_faa_partitions_are_counted_by_partition_numbers(N):
    partitions = faa_partitions(N)

    assert len(partitions) == partition_count(N)
    assert all(sum(i * p for i, p in enumerate(parts, start=1)) == N for parts in partitions)


@pytest.mark.parametrize(("N", "count"), [(1, 1), (5, 7), (10, 42), (12, 77)])
def test_partition_count_known_values(N, count):
    assert partition_count(N) == count


def test_compose_derivative_of_exp_sin():
    x = 0.4
    g = [math.exp(math.sin(x))] * 4
    f = [math.cos(x), -math.sin(x), -math.cos(x)]
    expected_second = math.exp(math.sin(x)) * (math.cos(x) ** 2 - math.sin(x))
    expected_third = math.exp(math.sin(x)) * (
        math.cos(x) ** 3 - 3 * math.sin(x) * math.cos(x) - math.cos(x)
    )

    assert compose_derivative(g, f, 2) == pytest.approx(expected_second, rel=1e-14)
    assert compose_derivative(g, f, 3) == pytest.approx(expected_third, rel=1e-14)


@pytest.mark.parametrize(
    ("g_derivs", "f_derivs", "N"),
    [([1.0], [1.0], 0), ([1.0, 1.0], [1.0, 1.0], 2), ([1.0, 1.0, 1.0], [1.0], 2)],
)
def test_compose_derivative_rejects_bad_input(g_derivs, f_derivs, N):
    with pytest.raises(DomainError):
        compose_derivative(g_derivs, f_derivs, N)


def test_faa_partitions_rejects_nonpositive_order():
    with pytest.raises(DomainError):
        faa_partitions(0)
