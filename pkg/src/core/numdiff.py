"""Central finite differences with Richardson extrapolation."""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

import numpy as np

from src.config import settings

_EPS = float(np.finfo(float).eps)


def default_step(x: float, order: int = 1, levels: int | None = None) -> float:
    """eps^(1 / (2 levels + 2 + order)) * max(1, |x|); FD_STEP replaces the eps power if set."""
    depth = settings.FD_LEVELS if levels is None else int(levels)
    base = settings.FD_STEP
    if base is None:
        base = _EPS ** (1.0 / (2 * depth + 2 + order))
    return base * max(1.0, abs(float(x)))


def richardson_derivative(
    f: Callable[[Any], Any],
    x0: float | np.ndarray,
    h: float | np.ndarray | None = None,
    *,
    order: int = 1,
    levels: int | None = None,
) -> Any:
    """First or second derivative of f at x0.

    Central differences at steps h, h/2, ..., h/2**levels are combined by
    Richardson extrapolation on the even error expansion. f may return arrays.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    depth = settings.FD_LEVELS if levels is None else int(levels)
    step = default_step(x0, order, depth) if h is None else np.asarray(h, dtype=float)
    centre = f(x0) if order == 2 else None

    def central(hh: float) -> Any:
        if order == 1:
            return (np.asarray(f(x0 + hh)) - np.asarray(f(x0 - hh))) / (2.0 * hh)
        return (np.asarray(f(x0 + hh)) - 2.0 * np.asarray(centre) + np.asarray(f(x0 - hh))) / hh**2

    table = [central(step / 2**i) for i in range(depth + 1)]
    for level in range(1, depth + 1):
        factor = 4.0**level
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)]
    return table[0]


def partial_derivative(
    f: Callable[[np.ndarray], Any],
    x: np.ndarray,
    axis: int,
    h: float | None = None,
    *,
    order: int = 1,
    levels: int | None = None,
) -> Any:
    """Richardson derivative of f along one coordinate of the vector x."""
    x = np.asarray(x, dtype=float)

    def along(value: float) -> Any:
        shifted = x.copy()
        shifted[axis] = value
        return f(shifted)

    return richardson_derivative(along, float(x[axis]), h, order=order, levels=levels)
