"""Exception hierarchy shared by the numerical modules and the CLI."""

from __future__ import annotations

from typing import Any


class LaguerreError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LaguerreError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class DiagonalError(DomainError):
    """A kernel that is singular on the diagonal was evaluated at x = y."""


class AdmissibilityError(DomainError):
    """A measure nu fails the integrability condition against exp(-t * lambda_0)."""


class ConfigError(LaguerreError):
    """A run configuration could not be parsed or validated."""


class ConvergenceError(LaguerreError, RuntimeError):
    """A numerical procedure stopped before reaching its tolerance."""

    def __init__(self, message: str, *, best_estimate: Any, achieved_tolerance: float) -> None:
        super().__init__(message)
        self.best_estimate = best_estimate
        self.achieved_tolerance = achieved_tolerance


class TruncationError(ConvergenceError):
    """A spectral series was truncated with a last shell above the requested tolerance."""

    def __init__(self, message: str, *, partial_sum: float, last_shell: float, tol: float) -> None:
        super().__init__(message, best_estimate=partial_sum, achieved_tolerance=last_shell)
        self.partial_sum = partial_sum
        self.last_shell = last_shell
        self.tol = tol
