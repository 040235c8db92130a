from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from src.core.models import AlphaIndex, SweepGrid
from src.core.operators import SpectralVector


@pytest.fixture
def make_alpha():
    def _make(*components: float) -> AlphaIndex:
        return AlphaIndex(components=tuple(float(a) for a in components))

    return _make


@pytest.fixture
def make_grid():
    """A sweep grid small enough for a unit test."""

    def _make(
        coordinates: tuple[float, ...] = (0.5, 2.0),
        gaps: tuple[float, ...] = (1e-1, 1e-2),
        depth: int = 1,
        directions: int = 2,
    ) -> SweepGrid:
        return SweepGrid(coordinates=coordinates, gaps=gaps, depth=depth, directions=directions)

    return _make


@pytest.fixture
def make_vector():
    def _make(
        alpha: tuple[float, ...] = (0.5,),
        k_max: int = 6,
        mapping: dict[tuple[int, ...], complex] | None = None,
    ) -> SpectralVector:
        if mapping is None:
            rng = np.random.default_rng(7)
            base = SpectralVector.zeros(alpha, k_max)
            decay = 1.0 + base.indices.sum(axis=1)
            return base.with_coeffs(rng.normal(size=base.coeffs.shape) / decay)
        return SpectralVector.from_mapping(alpha, k_max, mapping)

    return _make


@pytest.fixture
def write_config(tmp_path):
    def _write(payload: dict[str, Any], name: str = "run.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write
