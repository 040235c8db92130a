"""Validated value objects for type indices, multi-indices, points and balls."""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.exceptions import DomainError


class AlphaIndex(BaseModel):
    """Type multi-index alpha in (-1, inf)^d."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    components: tuple[float, ...] = Field(min_length=1)

    @field_validator("components")
    @classmethod
    def validate_components(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        bad = [a for a in value if not (math.isfinite(a) and a > -1.0)]
        if bad:
            raise ValueError(f"alpha components must lie in (-1, inf), got {bad}")
        return value

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def size(self) -> float:
        return float(sum(self.components))

    @property
    def bottom_eigenvalue(self) -> float:
        """2|alpha| + 2d, the eigenvalue of l_0."""
        return 2.0 * self.size + 2.0 * self.dim

    def as_array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)

    def __str__(self) -> str:
        return "(" + ", ".join(f"{a:g}" for a in self.components) + ")"


class PointRd(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    coords: tuple[float, ...] = Field(min_length=1)

    @field_validator("coords")
    @classmethod
    def validate_coords(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not all(math.isfinite(c) and c > 0.0 for c in value):
            raise ValueError(f"points of R_+^d need strictly positive coordinates, got {value}")
        return value


class BallSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    center: PointRd
    radius: float = Field(gt=0.0)

    @classmethod
    def around(cls, center: Sequence[float], radius: float) -> BallSpec:
        return cls(center=PointRd(coords=tuple(float(c) for c in center)), radius=float(radius))

    def center_array(self) -> np.ndarray:
        return np.asarray(self.center.coords, dtype=float)


AlphaLike = Union[AlphaIndex, Sequence[float], np.ndarray]
IndexLike = Union[Sequence[int], np.ndarray]
PointLike = Union[PointRd, Sequence[float], np.ndarray]


def as_alpha(alpha: AlphaLike) -> np.ndarray:
    """Coerce to a float array and enforce alpha_i > -1."""
    if isinstance(alpha, AlphaIndex):
        return alpha.as_array()
    arr = np.atleast_1d(np.asarray(alpha, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"alpha must be a non-empty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr) & (arr > -1.0)):
        raise DomainError(f"alpha components must lie in (-1, inf), got {arr.tolist()}")
    return arr


def as_multi_index(n: IndexLike, dim: int | None = None) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(n, dtype=int))
    if np.any(arr < 0):
        raise DomainError(f"multi-index components must be nonnegative, got {arr.tolist()}")
    if dim is not None and arr.size != dim:
        raise DomainError(f"multi-index has dimension {arr.size}, expected {dim}")
    return arr


def as_point(x: PointLike, dim: int | None = None) -> np.ndarray:
    if isinstance(x, PointRd):
        arr = np.asarray(x.coords, dtype=float)
    else:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
    if dim is not None and arr.size != dim:
        raise DomainError(f"point has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr) & (arr > 0.0)):
        raise DomainError(f"points of R_+^d need strictly positive coordinates, got {arr.tolist()}")
    return arr


def unit_index(dim: int, j: int = 0) -> np.ndarray:
    e = np.zeros(dim, dtype=int)
    e[j] = 1
    return e


def as_points(x: np.ndarray | Sequence[Sequence[float]] | Sequence[float], dim: int) -> np.ndarray:
    """Coerce an array of points with trailing axis of length dim, all in R_+^d."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != dim:
        raise DomainError(f"points must have trailing dimension {dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr) & (arr > 0.0)):
        raise DomainError("points of R_+^d need strictly positive coordinates")
    return arr


class SweepGrid(BaseModel):
    """(x, y) pairs: all ordered pairs of grid centers plus rays approaching the diagonal.

    Near-diagonal pairs sit at distance gaps[j] from each center, j < depth; the
    refinement level adds gaps[depth].
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    coordinates: tuple[float, ...] = (0.1, 0.5, 1.0, 2.0, 5.0)
    gaps: tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    depth: int = Field(default=2, ge=0)
    directions: int = Field(default=3, ge=1, le=3)

    @field_validator("coordinates", "gaps")
    @classmethod
    def validate_positive(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value or not all(math.isfinite(v) and v > 0.0 for v in value):
            raise ValueError(f"grid values must be positive and finite, got {value}")
        return value

    def centers(self, dim: int) -> list[tuple[float, ...]]:
        return list(itertools.product(sorted(self.coordinates), repeat=dim))

    def rays(self, dim: int) -> np.ndarray:
        if dim == 1:
            return np.array([[1.0], [-1.0]])
        diagonal = np.ones(dim) / math.sqrt(dim)
        return np.stack([diagonal, -diagonal, unit_index(dim).astype(float)])[: self.directions]

    def far_pairs(self, dim: int) -> list[tuple[tuple[float, ...], tuple[float, ...]]]:
        centers = self.centers(dim)
        return [(x, y) for x in centers for y in centers if x != y]

    def near_pairs(self, dim: int, gap: float) -> list[tuple[tuple[float, ...], tuple[float, ...]]]:
        pairs = []
        for x in self.centers(dim):
            for ray in self.rays(dim):
                y = np.asarray(x) + gap * ray
                if np.all(y > 0.0):
                    pairs.append((x, tuple(float(c) for c in y)))
        return pairs

    def levels(self, dim: int, depth: int | None = None) -> dict[str, list]:
        """Pairs keyed by level: "far" and one "gap=..." entry per near-diagonal shell."""
        depth = self.depth if depth is None else depth
        if depth > len(self.gaps):
            raise ValueError(f"depth {depth} exceeds the {len(self.gaps)} configured gaps")
        out = {"far": self.far_pairs(dim)}
        for gap in self.gaps[:depth]:
            out[f"gap={gap:g}"] = self.near_pairs(dim, gap)
        return out
