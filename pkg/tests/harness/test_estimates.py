from __future__ import annotations

import math
from unittest.mock import patch

import numpy as np
import pytest

from src.core.exceptions import DiagonalError, DomainError
from src.core.harness.estimates import (
    FamilyReport,
    RatioKind,
    gradient_ratio,
    growth_ratio,
    kernel_gradient,
    point_ratios,
    run_estimates,
    run_sweep,
    smoothness_ratio,
    taylor_check,
)
from src.core.kernels.families import KernelSpec, NuMeasure
from src.core.kernels.heat import heat_kernel_closed, kernel_derivative
from src.core.measure_geometry import ball_measure
from src.core.models import BallSpec


def _atom_spec(t0: float = 0.5) -> KernelSpec:
    return KernelSpec.stieltjes_mult(NuMeasure.atom(t0))


def test_growth_ratio_multiplies_norm_and_ball():
    alpha, x, y = (0.5,), [0.8], [1.4]
    expected = heat_kernel_closed(alpha, 0.5, x, y) * ball_measure(
        alpha, BallSpec.around(x, 0.6)
    )

    assert growth_ratio(_atom_spec(), alpha, x, y) == pytest.approx(expected, rel=1e-7)


def test_ratios_are_undefined_on_the_diagonal():
    with pytest.raises(DiagonalError):
        growth_ratio(_atom_spec(), (0.5,), [1.0], [1.0])


def test_smoothness_ratio_needs_a_small_offset():
    with pytest.raises(DomainError):
        smoothness_ratio(_atom_spec(), (0.5,), [1.0], [1.3], [1.5])


def test_smoothness_ratio_vanishes_without_offset():
    assert smoothness_ratio(_atom_spec(), (0.5,), [1.0], [1.0], [1.5]) == 0.0


def test_kernel_gradient_matches_analytic_derivative():
    alpha, t0, x, y = (0.5,), 0.5, [0.8], [1.4]
    # d/dx G = (d/dx + x) G - x G
    expected_x = kernel_derivative(alpha, t0, x, y, n=(1,)) - 0.8 * heat_kernel_closed(
        alpha, t0, x, y
    )

    gradient = kernel_gradient(_atom_spec(t0), alpha, x, y)

    assert gradient.shape == (2,)
    assert gradient[0] == pytest.approx(expected_x, rel=1e-6)


def test_gradient_ratio_needs_a_scalar_family():
    with pytest.raises(DomainError):
        gradient_ratio(KernelSpec.heat_max(), (0.5,), [0.8], [1.4])


def test_point_ratios_add_the_gradient_for_scalar_families():
    scalar = point_ratios(_atom_spec(), np.array([0.5]), [0.8], [1.4])
    vector = point_ratios(KernelSpec.heat_max(), np.array([0.5]), [0.8], [1.4])

    assert set(scalar) == {"growth", "smooth_x", "smooth_y", "gradient"}
    assert set(vector) == {"growth", "smooth_x", "smooth_y"}


def test_taylor_check_sees_first_order_decay():
    report = taylor_check(KernelSpec.heat_max(), (0.5,), [1.0], [2.0])

    assert len(report.norms) == 3
    assert report.ratios[-1] == pytest.approx(10.0, rel=0.1)
    assert report.passed


def test_run_sweep_covers_the_grid_and_one_extra_level(make_grid):
    grid = make_grid()

    report = run_sweep(KernelSpec.heat_max(), (0.5,), grid, threads=2)

    assert report.errors == []
    assert len(report.rows) == 10 * 3
    assert set(report.sups) == {"growth", "smooth_x", "smooth_y"}
    assert set(report.per_depth[RatioKind.GROWTH]) == {"far", "gap=0.1", "gap=0.01"}
    assert all(report.sups[kind] <= report.sups_refined[kind] for kind in report.sups)
    assert report.finite


def _flaky(spec, alpha, x, y):
    if abs(x[0] - y[0]) < 0.05:
        raise DomainError("near the diagonal")
    return {"growth": 1.0}


@patch("src.core.harness.estimates.point_ratios", side_effect=_flaky)
def test_run_sweep_records_failed_points(mock_ratios, make_grid):
    report = run_sweep(KernelSpec.heat_max(), (0.5,), make_grid(), threads=1)

    assert mock_ratios.call_count == 10
    assert len(report.errors) == 4
    assert all(error["level"] == "gap=0.01" for error in report.errors)
    assert "DomainError" in report.errors[0]["error"]
    assert report.sups == {"growth": 1.0}
    assert not report.passed


def _nan_near_diagonal(spec, alpha, x, y):
    growth = float("nan") if abs(x[0] - y[0]) < 0.05 else 1.0
    return {"growth": growth, "smooth_x": 2.0}


@patch("src.core.harness.estimates.point_ratios", side_effect=_nan_near_diagonal)
def test_run_sweep_fails_on_nan_ratios(mock_ratios, make_grid):
    report = run_sweep(KernelSpec.heat_max(), (0.5,), make_grid(), threads=1)

    assert len(report.rows) == 20
    assert len(report.errors) == 4
    assert report.errors[0]["error"] == "non-finite ratio: growth=nan"
    assert report.sups == {"growth": 1.0, "smooth_x": 2.0}
    assert report.sups_refined["growth"] == math.inf
    assert report.sups_refined["smooth_x"] == 2.0
    assert report.per_depth["growth"]["gap=0.01"] == math.inf
    assert math.isnan(report.worst["growth"]["value"])
    assert not report.finite
    assert not report.passed


@patch(
    "src.core.harness.estimates.point_ratios",
    return_value={"growth": float("nan"), "smooth_x": float("nan")},
)
def test_run_sweep_of_an_all_nan_family_does_not_pass(mock_ratios, make_grid):
    report = run_sweep(_atom_spec(), (0.0,), make_grid(), threads=1)

    assert len(report.errors) == mock_ratios.call_count == 10
    assert report.sups == {"growth": math.inf, "smooth_x": math.inf}
    assert not report.passed


def test_family_report_refinement_delta():
    report = FamilyReport(
        family="riesz",
        label="riesz(n=[1])",
        alpha=[0.5],
        sups={"growth": 2.0, "smooth_x": 1.0},
        sups_refined={"growth": 2.1, "smooth_x": 1.5},
    )

    assert report.refinement_delta == {"growth": pytest.approx(0.05), "smooth_x": 0.5}
    assert not report.stable


@patch("src.core.harness.estimates.run_sweep")
def test_run_estimates_runs_every_family_at_every_alpha(mock_sweep):
    mock_sweep.return_value = FamilyReport(family="heat_max", label="heat_max", alpha=[0.0])
    families = [KernelSpec.heat_max(), _atom_spec()]

    report = run_estimates(families, [(0.0,), (1.0,)], config={"seed": 0})

    assert mock_sweep.call_count == 4
    assert len(report.families) == 4
    assert report.config == {"seed": 0}
    assert report.runtime_seconds is None


def test_run_estimates_needs_families():
    with pytest.raises(DomainError):
        run_estimates([], [(0.0,)])
