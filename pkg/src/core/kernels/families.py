"""The Calderon-Zygmund kernel families and their Banach-space norms."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

import numpy as np
from scipy import integrate, optimize, special

from src.config import settings
from src.core.exceptions import AdmissibilityError, DiagonalError, DomainError
from src.core.kernels.heat import (
    heat_kernel_closed,
    kernel_derivative,
    poisson_kernel,
    poisson_kernel_derivative,
)
from src.core.models import AlphaLike, IndexLike, as_alpha, as_multi_index, as_point
from src.core.quadrature import QuadRule, adaptive_integrate, t_weighted_grid

logger = logging.getLogger(__name__)


class KernelFamily(StrEnum):
    HEAT_MAX = "heat_max"
    RIESZ = "riesz"
    SQUARE_FN = "square_fn"
    LAPLACE_MULT = "laplace_mult"
    STIELTJES_MULT = "stieltjes_mult"
    POISSON_MAX = "poisson_max"
    POISSON_SQUARE_FN = "poisson_square_fn"


class BanachTag(StrEnum):
    SUP_T = "sup_t"
    L2_T_WEIGHTED = "l2_t_weighted"
    SCALAR = "scalar"


class RieszMethod(StrEnum):
    PANELS = "panels"
    ADAPTIVE = "adaptive"


POISSON_FAMILIES = frozenset({KernelFamily.POISSON_MAX, KernelFamily.POISSON_SQUARE_FN})


# -- multiplier data ----------------------------------------------------------------------


@dataclass(frozen=True)
class PsiFunction:
    """Bounded function of t > 0 with an a-priori sup bound.

    breakpoints mark jumps; t-integrals are split there.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    bound: float
    label: str
    breakpoints: tuple[float, ...] = ()

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(t, dtype=float))


def psi_constant(c: float = 1.0) -> PsiFunction:
    return PsiFunction(
        fn=lambda t: np.full(np.shape(t), float(c)), bound=abs(float(c)), label=f"constant({c:g})"
    )


def psi_indicator(a: float, b: float) -> PsiFunction:
    if not 0.0 <= a < b:
        raise DomainError(f"indicator needs 0 <= a < b, got [{a}, {b}]")
    return PsiFunction(
        fn=lambda t: ((t >= a) & (t <= b)).astype(float),
        bound=1.0,
        label=f"indicator({a:g}, {b:g})",
        breakpoints=tuple(p for p in (a, b) if p > 0.0),
    )


def psi_imaginary_power(gamma: float) -> PsiFunction:
    """t^(-i gamma) / Gamma(1 - i gamma), whose multiplier is z^(i gamma)."""
    norm = special.gamma(1.0 - 1j * gamma)
    return PsiFunction(
        fn=lambda t: np.exp(-1j * gamma * np.log(t)) / norm,
        bound=float(1.0 / abs(norm)),
        label=f"imaginary_power({gamma:g})",
    )


def psi_exp_decay(rate: float) -> PsiFunction:
    if not rate > 0.0:
        raise DomainError(f"decay rate must be positive, got {rate}")
    return PsiFunction(fn=lambda t: np.exp(-rate * t), bound=1.0, label=f"exp_decay({rate:g})")


@dataclass(frozen=True, eq=False)
class NuMeasure:
    """Atoms (t_i, w_i) plus an optional density sampled on a t-grid.

    With density_weights the samples are integrated by those quadrature weights,
    otherwise by the trapezoid rule on the grid.
    """

    atoms: tuple[tuple[float, complex], ...] = ()
    density_t: np.ndarray | None = None
    density_values: np.ndarray | None = None
    density_weights: np.ndarray | None = None
    label: str = ""

    def __post_init__(self) -> None:
        atoms = tuple((float(t), complex(w)) for t, w in self.atoms)
        if any(not (math.isfinite(t) and t > 0.0) for t, _ in atoms):
            raise DomainError("atom positions must be positive and finite")
        object.__setattr__(self, "atoms", atoms)
        if (self.density_t is None) != (self.density_values is None):
            raise DomainError("a density needs both its t-grid and its values")
        if self.density_t is None:
            if not atoms:
                raise DomainError("a measure needs atoms or a density")
            return
        t = np.asarray(self.density_t, dtype=float)
        values = np.asarray(self.density_values)
        if t.ndim != 1 or t.shape != values.shape or t.size < 2:
            raise DomainError("density grid and values must be equally long vectors")
        if not (np.all(t > 0.0) and np.all(np.diff(t) > 0.0)):
            raise DomainError("density grid must be positive and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("density values must be finite")
        object.__setattr__(self, "density_t", t)
        object.__setattr__(self, "density_values", values)
        if self.density_weights is not None:
            object.__setattr__(
                self, "density_weights", np.asarray(self.density_weights, dtype=float)
            )

    @classmethod
    def atom(cls, t0: float, weight: complex = 1.0) -> NuMeasure:
        return cls(atoms=((t0, weight),), label=f"atom({t0:g})")

    @property
    def has_density(self) -> bool:
        return self.density_t is not None

    def integrate(self, f: Callable[[np.ndarray], Any]) -> Any:
        """Integral of f(t) d nu(t); f is vectorized over t and may add trailing axes."""
        total: Any = 0.0
        if self.atoms:
            ts = np.array([t for t, _ in self.atoms])
            ws = np.array([w for _, w in self.atoms])
            total = np.tensordot(ws, np.asarray(f(ts)), axes=(0, 0))
        if self.has_density:
            values = np.asarray(f(self.density_t))
            rho = self.density_values.reshape((-1,) + (1,) * (values.ndim - 1))
            if self.density_weights is None:
                total = total + integrate.trapezoid(rho * values, self.density_t, axis=0)
            else:
                total = total + np.tensordot(self.density_weights, rho * values, axes=(0, 0))
        total = np.asarray(total)
        if np.iscomplexobj(total) and np.all(total.imag == 0.0):
            total = total.real
        return total.item() if total.ndim == 0 else total

    def laplace(self, z: Any) -> Any:
        """m(z) = integral of e^{-tz} d nu(t)."""
        z = np.asarray(z, dtype=float)
        return self.integrate(lambda t: np.exp(-np.multiply.outer(t, z)))

    def variation_against(self, rate: float) -> float:
        """Integral of e^{-t rate} d|nu|(t)."""
        total = sum(abs(w) * math.exp(-t * rate) for t, w in self.atoms)
        if self.has_density:
            weighted = np.abs(self.density_values) * np.exp(-self.density_t * rate)
            if self.density_weights is None:
                total += float(integrate.trapezoid(weighted, self.density_t))
            else:
                total += float(self.density_weights @ weighted)
        return float(total)

    def check_admissible(self, alpha: AlphaLike, poisson: bool = False) -> float:
        """Raise AdmissibilityError unless e^{-t c} is |nu|-integrable, c = 2d + 2|alpha|.

        The Poisson variant tests c = sqrt(2d + 2|alpha|). Tabulated densities must
        also have died out against the envelope at the end of their grid.
        """
        alpha = as_alpha(alpha)
        bottom = 2.0 * alpha.size + 2.0 * alpha.sum()
        rate = math.sqrt(bottom) if poisson else bottom
        condition = "integral of exp(-t c) d|nu|(t) < inf"
        total = self.variation_against(rate)
        if not math.isfinite(total):
            raise AdmissibilityError(f"{self.label or 'nu'} violates {condition} for c={rate:g}")
        if self.has_density:
            t_end = float(self.density_t[-1])
            tail = abs(complex(self.density_values[-1])) * math.exp(-t_end * rate) * t_end
            if tail > 1e-8 * max(total, np.finfo(float).tiny):
                raise AdmissibilityError(
                    f"{self.label or 'nu'} does not decay against exp(-t c) on its grid "
                    f"(c={rate:g}, tail {tail:.3e}); {condition} cannot be confirmed"
                )
        return total


def _density_rule(t_min: float, t_max: float) -> QuadRule:
    return t_weighted_grid(1.0, t_min, t_max, _panel_count(t_min, t_max))


def nu_exponential(rate: float) -> NuMeasure:
    """rate e^{-rate t} dt, with m(z) = rate / (rate + z)."""
    if not rate > 0.0:
        raise DomainError(f"rate must be positive, got {rate}")
    rule = _density_rule(1e-16 / rate, 80.0 / rate)
    return NuMeasure(
        density_t=rule.nodes,
        density_values=rate * np.exp(-rate * rule.nodes),
        density_weights=rule.weights,
        label=f"exponential({rate:g})",
    )


def nu_gamma(shape: float, rate: float) -> NuMeasure:
    """rate^shape t^(shape-1) e^{-rate t} / Gamma(shape) dt.

    m(z) = (rate / (rate + z))^shape.
    """
    if not (shape > 0.0 and rate > 0.0):
        raise DomainError(f"shape and rate must be positive, got {shape}, {rate}")
    t_min = 1e-16 ** (1.0 / min(shape, 1.0)) / rate
    rule = _density_rule(t_min, (80.0 + 4.0 * shape) / rate)
    t = rule.nodes
    log_rho = shape * math.log(rate) + (shape - 1.0) * np.log(t) - rate * t - special.gammaln(shape)
    return NuMeasure(
        density_t=t,
        density_values=np.exp(log_rho),
        density_weights=rule.weights,
        label=f"gamma({shape:g}, {rate:g})",
    )


# -- kernel specs -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelSpec:
    family: KernelFamily
    n: tuple[int, ...] = ()
    m: int = 0
    psi: PsiFunction | None = None
    nu: NuMeasure | None = None
    label: str = ""

    def __post_init__(self) -> None:
        family = KernelFamily(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "n", tuple(int(k) for k in self.n))
        if any(k < 0 for k in self.n) or self.m < 0:
            raise DomainError(f"derivative orders must be nonnegative, got n={self.n}, m={self.m}")
        order = sum(self.n)
        if family == KernelFamily.RIESZ and order == 0:
            raise DomainError("Riesz kernels need |n| > 0")
        if family == KernelFamily.SQUARE_FN and not (0 < order + self.m <= order + 2 * self.m <= 4):
            raise DomainError(
                f"square functions need |n| + m > 0 and |n| + 2m <= 4, got {self.n}, {self.m}"
            )
        if family == KernelFamily.POISSON_SQUARE_FN and order + self.m != 1:
            raise DomainError("Poisson square functions need m + |n| = 1")
        if family == KernelFamily.LAPLACE_MULT:
            if self.psi is None or not math.isfinite(self.psi.bound):
                raise DomainError("Laplace-type multipliers need psi with a finite sup bound")
        if family == KernelFamily.STIELTJES_MULT and self.nu is None:
            raise DomainError("Laplace-Stieltjes multipliers need a measure nu")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        match self.family:
            case KernelFamily.RIESZ:
                return f"riesz(n={list(self.n)})"
            case KernelFamily.SQUARE_FN | KernelFamily.POISSON_SQUARE_FN:
                return f"{self.family}(n={list(self.n)}, m={self.m})"
            case KernelFamily.LAPLACE_MULT:
                return f"laplace_mult({self.psi.label})"
            case KernelFamily.STIELTJES_MULT:
                return f"stieltjes_mult({self.nu.label or 'nu'})"
        return str(self.family)

    @classmethod
    def heat_max(cls) -> KernelSpec:
        return cls(KernelFamily.HEAT_MAX)

    @classmethod
    def riesz(cls, n: Sequence[int]) -> KernelSpec:
        return cls(KernelFamily.RIESZ, n=tuple(n))

    @classmethod
    def square_fn(cls, n: Sequence[int], m: int) -> KernelSpec:
        return cls(KernelFamily.SQUARE_FN, n=tuple(n), m=m)

    @classmethod
    def laplace_mult(cls, psi: PsiFunction) -> KernelSpec:
        return cls(KernelFamily.LAPLACE_MULT, psi=psi)

    @classmethod
    def stieltjes_mult(cls, nu: NuMeasure) -> KernelSpec:
        return cls(KernelFamily.STIELTJES_MULT, nu=nu)

    @classmethod
    def poisson_max(cls) -> KernelSpec:
        return cls(KernelFamily.POISSON_MAX)

    @classmethod
    def poisson_square_fn(cls, n: Sequence[int], m: int) -> KernelSpec:
        return cls(KernelFamily.POISSON_SQUARE_FN, n=tuple(n), m=m)

    @property
    def banach_tag(self) -> BanachTag:
        if self.family in (KernelFamily.HEAT_MAX, KernelFamily.POISSON_MAX):
            return BanachTag.SUP_T
        if self.family in (KernelFamily.SQUARE_FN, KernelFamily.POISSON_SQUARE_FN):
            return BanachTag.L2_T_WEIGHTED
        return BanachTag.SCALAR

    @property
    def is_scalar(self) -> bool:
        return self.banach_tag == BanachTag.SCALAR

    @property
    def weight_exponent(self) -> float | None:
        """W of L^2(t^(W-1) dt) for square-function families."""
        if self.family == KernelFamily.SQUARE_FN:
            return float(sum(self.n) + 2 * self.m)
        if self.family == KernelFamily.POISSON_SQUARE_FN:
            return float(2 * sum(self.n) + 2 * self.m)
        return None

    @property
    def unproven(self) -> bool:
        return self.family in POISSON_FAMILIES

    def index(self, dim: int) -> np.ndarray:
        if not self.n:
            return np.zeros(dim, dtype=int)
        return as_multi_index(self.n, dim)


def default_families(dim: int) -> list[KernelSpec]:
    """One representative of each of the five families in dimension dim."""
    e1 = [1] + [0] * (dim - 1)
    return [
        KernelSpec.heat_max(),
        KernelSpec.riesz(e1),
        KernelSpec.square_fn([0] * dim, 1),
        KernelSpec.laplace_mult(psi_imaginary_power(0.5)),
        KernelSpec.stieltjes_mult(nu_exponential(1.0)),
    ]


# -- t windows ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TWindow:
    t_min: float
    t_max: float

    @property
    def panels(self) -> int:
        return _panel_count(self.t_min, self.t_max)


def _panel_count(t_min: float, t_max: float) -> int:
    return max(settings.T_PANELS, math.ceil(3.0 * math.log(t_max / t_min)))


def _envelope_time(alpha: np.ndarray, poisson: bool) -> float:
    bottom = 2.0 * alpha.sum() + 2.0 * alpha.size
    rate = math.sqrt(bottom) if poisson else bottom
    return math.log(1.0 / settings.ENVELOPE_CUTOFF) / rate


def t_window(spec: KernelSpec | None, alpha: AlphaLike, x: Any, y: Any) -> TWindow:
    """t-range carrying the kernel at (x, y) for the family.

    Below t_min the Gaussian factor exp(-|x - y|^2 / 4t) (for Poisson kernels the
    t / |x - y| decay) is negligible; above t_max the spectral envelope is below
    ENVELOPE_CUTOFF.
    """
    alpha = as_alpha(alpha)
    gap2 = float(np.sum((np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) ** 2))
    if gap2 == 0.0:
        raise DiagonalError("t-window is undefined on the diagonal")
    family = spec.family if spec is not None else None
    if family == KernelFamily.HEAT_MAX:
        return TWindow(min(settings.HEAT_MAX_T_MIN, gap2 / 100.0), settings.HEAT_MAX_T_MAX)
    if family in POISSON_FAMILIES:
        return TWindow(1e-4 * math.sqrt(gap2), _envelope_time(alpha, poisson=True))
    t_max = _envelope_time(alpha, poisson=False)
    return TWindow(min(gap2 / 1000.0, t_max / 10.0), t_max)


def _pair(alpha: AlphaLike, x: Any, y: Any) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    alpha = as_alpha(alpha)
    x = as_point(x, alpha.size)
    y = as_point(y, alpha.size)
    if np.array_equal(x, y):
        raise DiagonalError(f"kernel is singular on the diagonal x = y = {x.tolist()}")
    return alpha, x, y


# -- scalar kernels -----------------------------------------------------------------------


def riesz_kernel(
    alpha: AlphaLike,
    n: IndexLike,
    x: Any,
    y: Any,
    method: RieszMethod | str = RieszMethod.PANELS,
    window: TWindow | None = None,
    tol: float = 1e-10,
) -> float:
    """Gamma(|n|/2)^-1 times the integral of delta_x^n G_t(x, y) t^(|n|/2 - 1) dt.

    The panel method integrates on log-panels with the t-power in the weights;
    the adaptive one substitutes u = t^(|n|/2), which removes the power.
    """
    alpha, x, y = _pair(alpha, x, y)
    n = as_multi_index(n, alpha.size)
    half = int(n.sum()) / 2.0
    if half == 0.0:
        raise DomainError("Riesz kernels need |n| > 0")
    window = window or t_window(None, alpha, x, y)
    rule = t_weighted_grid(half, window.t_min, window.t_max, window.panels)
    values = np.asarray(kernel_derivative(alpha, rule.nodes, x, y, n, 0))
    by_panels = float(values @ rule.weights) / special.gamma(half)
    if RieszMethod(method) == RieszMethod.PANELS:
        return by_panels

    def integrand(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        positive = u > 0.0
        out[positive] = kernel_derivative(alpha, u[positive] ** (1.0 / half), x, y, n, 0)
        return out

    value = adaptive_integrate(
        integrand,
        0.0,
        window.t_max**half,
        max(abs(by_panels), 1e-300) * tol,
        rel_tol=tol,
    )
    return value / (half * special.gamma(half))


def riesz_kernel_batch(alpha: AlphaLike, n: IndexLike, xs: Any, ys: Any) -> np.ndarray:
    """Riesz kernel on many off-diagonal pairs sharing the window of the closest pair."""
    alpha = as_alpha(alpha)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    n = as_multi_index(n, alpha.size)
    half = int(n.sum()) / 2.0
    if half == 0.0:
        raise DomainError("Riesz kernels need |n| > 0")
    gaps = np.sqrt(np.sum((xs - ys) ** 2, axis=-1))
    if np.any(gaps == 0.0):
        raise DiagonalError("Riesz kernel requested on the diagonal")
    closest = int(np.argmin(gaps))
    window = t_window(None, alpha, xs[closest], ys[closest])
    rule = t_weighted_grid(half, window.t_min, window.t_max, window.panels)
    values = np.asarray(kernel_derivative(alpha, rule.nodes[:, None], xs, ys, n, 0))
    return rule.weights @ values / special.gamma(half)


def _window_rules(window: TWindow, breakpoints: Sequence[float]) -> list[QuadRule]:
    """Log-panel rules for dt on the window, split at the breakpoints inside it."""
    cuts = [window.t_min, *sorted(p for p in breakpoints if window.t_min < p < window.t_max)]
    cuts.append(window.t_max)
    return [t_weighted_grid(1.0, a, b, _panel_count(a, b)) for a, b in zip(cuts[:-1], cuts[1:])]


def laplace_kernel(
    psi: PsiFunction, alpha: AlphaLike, x: Any, y: Any, window: TWindow | None = None
) -> complex | float:
    """-integral of psi(t) d_t G_t(x, y) dt."""
    alpha, x, y = _pair(alpha, x, y)
    window = window or t_window(None, alpha, x, y)
    total: Any = 0.0
    for rule in _window_rules(window, psi.breakpoints):
        dt = np.asarray(kernel_derivative(alpha, rule.nodes, x, y, None, 1))
        total = total - (psi(rule.nodes) * dt) @ rule.weights
    return complex(total) if np.iscomplexobj(total) else float(total)


def stieltjes_kernel(nu: NuMeasure, alpha: AlphaLike, x: Any, y: Any) -> complex | float:
    """Integral of G_t(x, y) d nu(t)."""
    alpha, x, y = _pair(alpha, x, y)
    return nu.integrate(lambda t: heat_kernel_closed(alpha, t, x, y))


def kernel_value(
    spec: KernelSpec, alpha: AlphaLike, x: Any, y: Any, window: TWindow | None = None
) -> complex | float:
    """Signed value of a scalar kernel family."""
    alpha, x, y = _pair(alpha, x, y)
    match spec.family:
        case KernelFamily.RIESZ:
            return riesz_kernel(alpha, spec.index(alpha.size), x, y, window=window)
        case KernelFamily.LAPLACE_MULT:
            return laplace_kernel(spec.psi, alpha, x, y, window)
        case KernelFamily.STIELTJES_MULT:
            spec.nu.check_admissible(alpha)
            return stieltjes_kernel(spec.nu, alpha, x, y)
    raise DomainError(f"{spec.label} is not scalar-valued; use banach_norm")


# -- vector-valued kernels ----------------------------------------------------------------


def kernel_profile(
    spec: KernelSpec, alpha: np.ndarray, x: np.ndarray, y: np.ndarray, t: np.ndarray
) -> np.ndarray:
    """t -> K(x, y)(t) for the sup_t and L^2(t^(W-1) dt) families."""
    n = spec.index(alpha.size)
    match spec.family:
        case KernelFamily.HEAT_MAX:
            return np.asarray(heat_kernel_closed(alpha, t, x, y))
        case KernelFamily.SQUARE_FN:
            return np.asarray(kernel_derivative(alpha, t, x, y, n, spec.m))
        case KernelFamily.POISSON_MAX:
            values = [poisson_kernel(alpha, ti, x, y) for ti in np.ravel(t)]
            return np.array(values).reshape(np.shape(t))
        case KernelFamily.POISSON_SQUARE_FN:
            return np.array(
                [poisson_kernel_derivative(alpha, ti, x, y, n, spec.m) for ti in np.ravel(t)]
            ).reshape(np.shape(t))
    raise DomainError(f"{spec.label} has no t-profile")


def refined_sup(
    profile: Callable[[np.ndarray], np.ndarray], window: TWindow, points: int | None = None
) -> tuple[float, float]:
    """sup over t of |profile| on a log grid plus a bounded 1-D search around the grid max.

    Returns (value, t at the sup).
    """
    grid = np.geomspace(window.t_min, window.t_max, points or settings.HEAT_MAX_GRID_POINTS)
    values = np.abs(np.asarray(profile(grid)))
    i = int(np.argmax(values))
    if i == grid.size - 1:
        logger.warning("sup attained at the window end t=%s; enlarge HEAT_MAX_T_MAX", grid[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]

    def negative(s: float) -> float:
        return -float(np.abs(np.asarray(profile(np.array([math.exp(s)]))))[0])

    result = optimize.minimize_scalar(
        negative, bounds=(math.log(lo), math.log(hi)), method="bounded", options={"xatol": 1e-10}
    )
    if -result.fun > values[i]:
        return float(-result.fun), float(math.exp(result.x))
    return float(values[i]), float(grid[i])


def _vector_norm(
    spec: KernelSpec, profile: Callable[[np.ndarray], np.ndarray], window: TWindow
) -> float:
    if spec.banach_tag == BanachTag.SUP_T:
        return refined_sup(profile, window)[0]
    rule = t_weighted_grid(spec.weight_exponent, window.t_min, window.t_max, window.panels)
    values = np.abs(np.asarray(profile(rule.nodes)))
    return float(math.sqrt(float(values**2 @ rule.weights)))


def banach_norm(spec: KernelSpec, alpha: AlphaLike, x: Any, y: Any) -> float:
    """||K(x, y)|| in the family's Banach space."""
    alpha, x, y = _pair(alpha, x, y)
    if spec.is_scalar:
        return abs(kernel_value(spec, alpha, x, y))
    window = t_window(spec, alpha, x, y)
    return _vector_norm(spec, lambda t: kernel_profile(spec, alpha, x, y, t), window)


def banach_difference_norm(
    spec: KernelSpec,
    alpha: AlphaLike,
    pair: tuple[Any, Any],
    other: tuple[Any, Any],
    window: TWindow | None = None,
) -> float:
    """||K(x, y) - K(x', y')||, both kernels evaluated on the window of (x, y)."""
    alpha, x, y = _pair(alpha, *pair)
    _, x2, y2 = _pair(alpha, *other)
    if spec.family == KernelFamily.STIELTJES_MULT:
        return abs(kernel_value(spec, alpha, x, y) - kernel_value(spec, alpha, x2, y2))
    window = window or t_window(spec, alpha, x, y)
    if spec.is_scalar:
        first = kernel_value(spec, alpha, x, y, window)
        return abs(first - kernel_value(spec, alpha, x2, y2, window))

    def difference(t: np.ndarray) -> np.ndarray:
        return kernel_profile(spec, alpha, x, y, t) - kernel_profile(spec, alpha, x2, y2, t)

    return _vector_norm(spec, difference, window)
