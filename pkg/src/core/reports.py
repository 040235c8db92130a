"""Report models shared by the lemma checks, the identity suite and the sweeps."""

from __future__ import annotations

import math
from typing import Any

from pydantic import BaseModel, Field

from src.config import settings


def relative_growth(coarse: float, fine: float) -> float:
    """(fine - coarse) / coarse, 0 when both vanish."""
    if coarse == 0.0:
        return 0.0 if fine == 0.0 else math.inf
    return (fine - coarse) / abs(coarse)


class SupReport(BaseModel):
    """Supremum of a ratio over a grid and over its refinement."""

    name: str
    parameters: dict[str, Any] = Field(default_factory=dict)
    sup: float
    sup_refined: float
    worst: dict[str, Any] = Field(default_factory=dict)
    details: dict[str, Any] = Field(default_factory=dict)

    @property
    def growth(self) -> float:
        return relative_growth(self.sup, self.sup_refined)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.sup) and math.isfinite(self.sup_refined)

    @property
    def stable(self) -> bool:
        return self.finite and self.growth < settings.REFINEMENT_GROWTH_LIMIT

    @property
    def passed(self) -> bool:
        return self.stable


class BandReport(BaseModel):
    """Interval [lo, hi] of a two-sided comparability ratio, base and refined grid."""

    name: str
    parameters: dict[str, Any] = Field(default_factory=dict)
    lo: float
    hi: float
    lo_refined: float
    hi_refined: float
    max_spread: float | None = None

    @property
    def spread(self) -> float:
        return self.hi / self.lo if self.lo > 0.0 else math.inf

    @property
    def spread_refined(self) -> float:
        return self.hi_refined / self.lo_refined if self.lo_refined > 0.0 else math.inf

    @property
    def stable(self) -> bool:
        limit = 1.0 + settings.REFINEMENT_GROWTH_LIMIT
        return math.isfinite(self.spread_refined) and self.spread_refined <= limit * self.spread

    @property
    def passed(self) -> bool:
        within = self.max_spread is None or self.spread_refined <= self.max_spread
        return self.stable and within


class SampleReport(BaseModel):
    """Random-sample check: hard violations plus either a known bound or sample-size stability."""

    name: str
    samples: int
    seed: int
    violations: int = 0
    sup: float = 0.0
    sup_refined: float = 0.0
    expected: float | None = None
    details: dict[str, Any] = Field(default_factory=dict)

    @property
    def stable(self) -> bool:
        if not (math.isfinite(self.sup) and math.isfinite(self.sup_refined)):
            return False
        return relative_growth(self.sup, self.sup_refined) < settings.REFINEMENT_GROWTH_LIMIT

    @property
    def passed(self) -> bool:
        if self.violations:
            return False
        if self.expected is not None:
            return self.sup_refined <= self.expected * (1.0 + 1e-12)
        return self.stable


class CheckResult(BaseModel):
    """One line of the identity suite."""

    name: str
    passed: bool
    achieved: float
    tolerance: float
    detail: str = ""
