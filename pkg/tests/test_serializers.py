from __future__ import annotations

import json
import math

import numpy as np
import pytest

from src.config import settings
from src.core.exceptions import ConfigError
from src.core.harness.identities import VerifyProfile
from src.core.kernels.families import KernelFamily
from src.core.serializers import (
    ApplyConfig,
    FamilyConfig,
    InputConfig,
    KernelRequest,
    OperatorName,
    QuadratureOverrides,
    SweepConfig,
    VerifyConfig,
    load_config,
    parse_config,
    read_payload,
    to_csv,
    to_json,
)


def test_verify_config_defaults():
    config = parse_config(VerifyConfig, {})

    assert config.profile == VerifyProfile.QUICK
    assert config.resolved_alphas == [(-0.9,), (-0.5,), (0.0,), (2.5,)]
    assert parse_config(VerifyConfig, {"dim": 2}).resolved_alphas[0] == (-0.9, 1.5)


def test_verify_config_rejects_alpha_at_or_below_minus_one():
    with pytest.raises(ConfigError, match="alphas"):
        parse_config(VerifyConfig, {"alphas": [[-1.2]]})


@pytest.mark.parametrize(
    "payload",
    [
        {"schema_version": 2},
        {"unknown": 1},
        {"profile": "exhaustive"},
        {"dim": 3},
        {"alphas": []},
        {"quadrature": {"t_panels": 0}},
    ],
)
def test_verify_config_rejects_bad_payloads(payload):
    with pytest.raises(ConfigError, match="invalid VerifyConfig"):
        parse_config(VerifyConfig, payload)


def test_sweep_config_builds_default_families():
    config = parse_config(SweepConfig, {"alphas": [[0.5]]})

    labels = [spec.label for spec in config.build_families(1)]

    assert config.families is None
    assert len(labels) == len(set(labels)) > 0


def test_sweep_config_needs_families_when_given():
    with pytest.raises(ConfigError, match="families"):
        parse_config(SweepConfig, {"families": []})


def test_sweep_config_builds_configured_families():
    config = parse_config(
        SweepConfig,
        {
            "alphas": [[0.0, 1.0]],
            "families": [
                {"family": "riesz"},
                {"family": "stieltjes_mult", "nu": {"name": "exponential", "params": {"rate": 2}}},
                {
                    "family": "laplace_mult",
                    "psi": {"name": "imaginary_power", "params": {"gamma": 1}},
                },
            ],
            "grid": {"coordinates": [0.5, 1.0], "gaps": [0.1], "depth": 1},
        },
    )

    riesz, stieltjes, laplace = config.build_families(2)

    assert riesz.family == KernelFamily.RIESZ
    assert riesz.n == (1, 0)
    assert stieltjes.family == KernelFamily.STIELTJES_MULT
    assert laplace.family == KernelFamily.LAPLACE_MULT
    assert config.grid.depth == 1


def test_stieltjes_family_needs_a_measure():
    with pytest.raises(ConfigError, match="needs a measure"):
        FamilyConfig(family=KernelFamily.STIELTJES_MULT).build(1)


def test_unknown_builder_names_are_config_errors():
    family = FamilyConfig(family=KernelFamily.LAPLACE_MULT, psi={"name": "sawtooth"})

    with pytest.raises(ConfigError, match="unknown psi"):
        family.build(1)


@pytest.mark.parametrize(
    ("payload", "message"),
    [
        ({"op": "heat"}, "needs t"),
        ({"op": "riesz"}, "needs n"),
        ({"op": "stieltjes_mult"}, "needs nu"),
        ({"op": "heat", "t": 1.0, "points": [[-1.0]]}, "R_\\+"),
        ({"op": "riesz", "n": [1, 0]}, "n must have 1"),
    ],
)
def test_apply_config_requirements(payload, message):
    base = {"alpha": [0.5], "input": {"name": "laguerre", "k": [1]}, "points": [[1.0]]}

    with pytest.raises(ConfigError, match=message):
        parse_config(ApplyConfig, {**base, **payload})


def test_apply_config_defaults_k_max_from_settings():
    config = parse_config(
        ApplyConfig,
        {
            "op": "maximal",
            "alpha": [0.5],
            "input": {"name": "gaussian", "center": [1.0], "width": 0.5},
            "points": [[1.0], [2.0]],
        },
    )

    assert config.op == OperatorName.MAXIMAL
    assert config.k_max == settings.OPERATOR_K_MAX


@pytest.mark.parametrize(
    "payload",
    [{"name": "laguerre"}, {"name": "bump", "center": [1.0]}, {"name": "triangle"}],
)
def test_input_config_validation(payload):
    with pytest.raises(ValueError):
        InputConfig(**payload)


def test_coefficient_input_builds_a_vector():
    config = InputConfig(name="coefficients", coefficients=[{"k": [2], "c": 0.5}])

    vector = config.vector((0.5,), k_max=4)

    assert vector.coeffs[2] == 0.5
    with pytest.raises(ConfigError):
        config.build((0.5,))


def test_kernel_request_rejects_points_off_the_cone():
    with pytest.raises(ConfigError, match="x must lie"):
        parse_config(KernelRequest, {"alpha": [0.5], "t": 1.0, "x": [0.0], "y": [1.0]})


def test_quadrature_overrides_are_restored():
    before = settings.T_PANELS
    overrides = QuadratureOverrides(t_panels=before + 5)

    with overrides.applied():
        assert settings.T_PANELS == before + 5

    assert settings.T_PANELS == before


def test_read_payload_without_path_is_empty():
    assert read_payload(None) == {}


def test_load_config_from_file(write_config):
    path = write_config({"profile": "full", "seed": 9})

    config = load_config(VerifyConfig, path)

    assert config.profile == VerifyProfile.FULL
    assert config.seed == 9


def test_read_payload_errors(tmp_path, write_config):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")

    with pytest.raises(ConfigError, match="not valid JSON"):
        read_payload(broken)
    with pytest.raises(ConfigError, match="JSON object"):
        read_payload(write_config([1, 2, 3]))
    with pytest.raises(ConfigError, match="cannot read"):
        read_payload(tmp_path / "missing.json")


def test_to_csv_formats_cells():
    rows = [{"name": "a", "passed": True, "achieved": 0.25, "x": [1.0, 2.0]}]

    text = to_csv(rows, ("name", "passed", "achieved", "x", "detail"))

    header, line, _ = text.split("\r\n")
    assert header == "name,passed,achieved,x,detail"
    assert line == "a,true,2.5000000000000000e-01,1.0000000000000000e+00 2.0000000000000000e+00,"


def test_to_csv_keeps_non_finite_values():
    text = to_csv([{"value": math.inf}], ("value",))

    assert text.split("\r\n")[1] == "inf"


def test_to_json_handles_numpy_and_complex():
    payload = {"array": np.array([1.0, 2.0]), "scalar": np.float64(0.1), "z": 1 + 2j}

    assert json.loads(to_json(payload)) == {
        "array": [1.0, 2.0],
        "scalar": 0.1,
        "z": {"re": 1.0, "im": 2.0},
    }
