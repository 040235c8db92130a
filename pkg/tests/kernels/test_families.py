from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, special

from src.core.exceptions import AdmissibilityError, DiagonalError, DomainError
from src.core.kernels.families import (
    BanachTag,
    KernelFamily,
    KernelSpec,
    NuMeasure,
    RieszMethod,
    TWindow,
    banach_difference_norm,
    banach_norm,
    default_families,
    kernel_profile,
    kernel_value,
    laplace_kernel,
    nu_exponential,
    nu_gamma,
    psi_constant,
    psi_exp_decay,
    psi_imaginary_power,
    psi_indicator,
    refined_sup,
    riesz_kernel,
    riesz_kernel_batch,
    stieltjes_kernel,
    t_window,
)
from src.core.kernels.heat import heat_kernel_closed


def test_psi_builders():
    assert psi_constant(2.0).bound == 2.0
    np.testing.assert_array_equal(psi_constant(2.0)(np.array([0.1, 3.0])), [2.0, 2.0])
    assert psi_indicator(0.0, 1.5).breakpoints == (1.5,)
    assert psi_exp_decay(2.0)(np.array([0.5]))[0] == pytest.approx(math.exp(-1.0))


def test_imaginary_power_bound_is_the_modulus():
    psi = psi_imaginary_power(0.5)
    t = np.geomspace(1e-3, 1e3, 7)

    np.testing.assert_allclose(np.abs(psi(t)), psi.bound, rtol=1e-13)
    assert psi.bound == pytest.approx(1.0 / abs(special.gamma(1.0 - 0.5j)))


@pytest.mark.parametrize(
    "build",
    [lambda: psi_indicator(1.0, 1.0), lambda: psi_indicator(-1.0, 1.0), lambda: psi_exp_decay(0.0)],
)
def test_psi_builders_validate_parameters(build):
    with pytest.raises(DomainError):
        build()


def test_atom_laplace_transform():
    nu = NuMeasure.atom(0.7, 2.0)

    z = np.array([1.0, 3.0])

    np.testing.assert_allclose(nu.laplace(z), 2.0 * np.exp(-0.7 * z))
    assert nu.label == "atom(0.7)"


@pytest.mark.parametrize("z", [0.2, 1.0, 7.5, 40.0])
def test_exponential_measure_symbol(z):
    assert nu_exponential(2.0).laplace(z) == pytest.approx(2.0 / (2.0 + z), rel=1e-8)


@pytest.mark.parametrize(("shape", "rate"), [(0.5, 1.0), (2.0, 3.0)])
def test_gamma_measure_symbol(shape, rate):
    z = 1.7

    assert nu_gamma(shape, rate).laplace(z) == pytest.approx((rate / (rate + z)) ** shape, rel=1e-7)


@pytest.mark.parametrize(
    "kwargs",
    [
        {},
        {"atoms": ((0.0, 1.0),)},
        {"density_t": np.array([1.0, 2.0])},
        {"density_t": np.array([2.0, 1.0]), "density_values": np.array([1.0, 1.0])},
    ],
)
def test_nu_measure_validation(kwargs):
    with pytest.raises(DomainError):
        NuMeasure(**kwargs)


def test_admissibility_accepts_decaying_measures():
    total = nu_exponential(1.0).check_admissible((0.5,))

    assert total == pytest.approx(1.0 / 4.0, rel=1e-6)


def test_admissibility_rejects_a_density_cut_off_before_it_decays():
    t = np.linspace(1.0, 10.0, 50)
    nu = NuMeasure(density_t=t, density_values=np.ones_like(t), label="flat")

    with pytest.raises(AdmissibilityError):
        nu.check_admissible((-0.9,))


@pytest.mark.parametrize(
    "build",
    [
        lambda: KernelSpec.riesz([0]),
        lambda: KernelSpec.square_fn([0], 0),
        lambda: KernelSpec.square_fn([3], 1),
        lambda: KernelSpec.poisson_square_fn([1], 1),
        lambda: KernelSpec(KernelFamily.LAPLACE_MULT),
        lambda: KernelSpec(KernelFamily.STIELTJES_MULT),
        lambda: KernelSpec.square_fn([-1], 1),
    ],
)
def test_kernel_spec_validation(build):
    with pytest.raises(DomainError):
        build()


@pytest.mark.parametrize(
    ("spec", "tag", "weight", "label"),
    [
        (KernelSpec.heat_max(), BanachTag.SUP_T, None, "heat_max"),
        (KernelSpec.riesz([0, 1]), BanachTag.SCALAR, None, "riesz(n=[0, 1])"),
        (KernelSpec.square_fn([1], 1), BanachTag.L2_T_WEIGHTED, 3.0, "square_fn(n=[1], m=1)"),
        (KernelSpec.poisson_square_fn([1], 0), BanachTag.L2_T_WEIGHTED, 2.0, None),
        (KernelSpec.poisson_max(), BanachTag.SUP_T, None, "poisson_max"),
    ],
)
def test_kernel_spec_properties(spec, tag, weight, label):
    assert spec.banach_tag == tag
    assert spec.weight_exponent == weight
    if label is not None:
        assert spec.label == label


def test_poisson_families_are_flagged_unproven():
    assert KernelSpec.poisson_max().unproven
    assert not KernelSpec.heat_max().unproven


def test_default_families_cover_the_five_families():
    families = default_families(2)

    assert [spec.family for spec in families] == [
        KernelFamily.HEAT_MAX,
        KernelFamily.RIESZ,
        KernelFamily.SQUARE_FN,
        KernelFamily.LAPLACE_MULT,
        KernelFamily.STIELTJES_MULT,
    ]
    assert families[1].index(2).tolist() == [1, 0]
    assert families[2].index(2).tolist() == [0, 0]


def test_t_window_is_undefined_on_the_diagonal():
    with pytest.raises(DiagonalError):
        t_window(None, (0.0,), [1.0], [1.0])
    with pytest.raises(DiagonalError):
        banach_norm(KernelSpec.heat_max(), (0.0,), [1.0], [1.0])


def test_t_window_shrinks_with_the_gap():
    wide = t_window(None, (0.0,), [1.0], [2.0])
    narrow = t_window(None, (0.0,), [1.0], [1.01])

    assert narrow.t_min < wide.t_min
    assert narrow.t_max == wide.t_max


def test_stieltjes_atom_kernel_is_the_heat_kernel():
    alpha, x, y = (0.5,), [0.8], [1.3]

    value = stieltjes_kernel(NuMeasure.atom(0.7), alpha, x, y)

    assert value == pytest.approx(heat_kernel_closed(alpha, 0.7, x, y), rel=1e-14)


def test_stieltjes_exponential_kernel_integrates_down_to_tiny_times():
    alpha, x, y = (0.0,), [1.0], [1.5]

    def integrand(t: float) -> float:
        return heat_kernel_closed(alpha, t, x, y) * math.exp(-t)

    expected = sum(
        integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
        for a, b in [(0.0, 0.01), (0.01, 1.0), (1.0, np.inf)]
    )

    value = stieltjes_kernel(nu_exponential(1.0), alpha, x, y)

    assert math.isfinite(value)
    assert value == pytest.approx(expected, rel=1e-5)
    assert value == pytest.approx(0.12151, rel=1e-4)


def test_laplace_kernel_of_a_constant_vanishes_off_the_diagonal():
    assert abs(laplace_kernel(psi_constant(), (0.5,), [0.8], [1.6])) < 1e-10


def test_laplace_kernel_of_an_indicator_telescopes():
    alpha, x, y = (0.3,), [0.9], [1.4]
    expected = heat_kernel_closed(alpha, 0.2, x, y) - heat_kernel_closed(alpha, 1.0, x, y)

    assert laplace_kernel(psi_indicator(0.2, 1.0), alpha, x, y) == pytest.approx(expected, rel=1e-8)


def test_imaginary_power_kernel_is_complex():
    value = kernel_value(KernelSpec.laplace_mult(psi_imaginary_power(0.5)), (0.5,), [0.8], [1.2])

    assert isinstance(value, complex)
    assert math.isfinite(abs(value))


@pytest.mark.parametrize(
    ("alpha", "x", "y"),
    [((0.5,), [0.7], [1.4]), ((0.0, 1.0), [0.6, 1.0], [1.1, 0.5])],
)
def test_riesz_panels_agree_with_adaptive_integration(alpha, x, y):
    n = [1] + [0] * (len(alpha) - 1)

    panels = riesz_kernel(alpha, n, x, y, method=RieszMethod.PANELS)
    adaptive = riesz_kernel(alpha, n, x, y, method="adaptive")

    assert panels == pytest.approx(adaptive, rel=1e-6)


def test_riesz_batch_matches_single_pairs():
    alpha, n = (0.5,), [1]
    xs = np.array([[0.7], [0.9]])
    ys = np.array([[1.4], [2.0]])
    window = t_window(None, alpha, xs[0], ys[0])

    batch = riesz_kernel_batch(alpha, n, xs, ys)

    assert batch[0] == pytest.approx(riesz_kernel(alpha, n, xs[0], ys[0]), rel=1e-12)
    assert batch[1] == pytest.approx(riesz_kernel(alpha, n, xs[1], ys[1], window=window), rel=1e-12)


def test_scalar_value_of_a_vector_family_is_an_error():
    with pytest.raises(DomainError):
        kernel_value(KernelSpec.heat_max(), (0.0,), [1.0], [2.0])
    with pytest.raises(DomainError):
        kernel_profile(
            KernelSpec.riesz([1]), np.array([0.0]), np.array([1.0]), np.array([2.0]), 1.0
        )


def test_refined_sup_finds_an_interior_maximum():
    value, where = refined_sup(lambda t: t * np.exp(-t), TWindow(1e-3, 100.0), points=40)

    assert value == pytest.approx(1.0 / math.e, rel=1e-10)
    assert where == pytest.approx(1.0, rel=1e-4)


def test_heat_max_norm_dominates_a_dense_scan():
    alpha, x, y = (0.2,), np.array([0.6]), np.array([1.5])
    scan = np.max(heat_kernel_closed(alpha, np.geomspace(1e-3, 20.0, 4000), x, y))

    value = banach_norm(KernelSpec.heat_max(), alpha, x, y)

    assert scan * (1.0 - 1e-12) <= value <= scan * (1.0 + 1e-4)


def test_square_function_norm_is_positive_and_differences_vanish_on_equal_pairs():
    spec = KernelSpec.square_fn([0], 1)
    pair = ([0.6], [1.5])

    assert banach_norm(spec, (0.2,), *pair) > 0.0
    assert banach_difference_norm(spec, (0.2,), pair, pair) == 0.0


def test_stieltjes_difference_norm():
    spec = KernelSpec.stieltjes_mult(NuMeasure.atom(0.5))
    alpha = (0.0,)
    expected = abs(
        heat_kernel_closed(alpha, 0.5, [0.6], [1.5]) - heat_kernel_closed(alpha, 0.5, [0.7], [1.5])
    )

    value = banach_difference_norm(spec, alpha, ([0.6], [1.5]), ([0.7], [1.5]))

    assert value == pytest.approx(expected, rel=1e-12)
