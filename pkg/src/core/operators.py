"""Operators acting on truncated Fourier-Laguerre expansions."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace
from enum import StrEnum
from functools import lru_cache
from typing import Any

import numpy as np

from src.config import settings
from src.core.exceptions import DomainError
from src.core.kernels.families import (
    NuMeasure,
    PsiFunction,
    TWindow,
    refined_sup,
    riesz_kernel_batch,
)
from src.core.kernels.heat import heat_kernel_closed
from src.core.models import AlphaLike, IndexLike, as_alpha, as_multi_index, as_points
from src.core.quadrature import (
    DomainTag,
    ProductRule,
    QuadRule,
    adaptive_integrate,
    mu_composite_rule,
    mu_gauss_laguerre_rule,
    t_weighted_grid,
)
from src.core.special_fn import delta_laguerre_table

logger = logging.getLogger(__name__)

# e^{u - e^u} is below 1e-20 outside this range of u = log(t z).
_LAPLACE_U_RANGE = (-46.0, 4.0)


@lru_cache(maxsize=64)
def _multi_index_table(dim: int, k_max: int) -> tuple[tuple[int, ...], ...]:
    table = [k for k in itertools.product(range(k_max + 1), repeat=dim) if sum(k) <= k_max]
    return tuple(sorted(table, key=lambda k: (sum(k), k)))


def multi_indices(dim: int, k_max: int) -> np.ndarray:
    """All k in N^dim with |k| <= k_max, ordered by |k| then lexicographically."""
    if dim < 1 or k_max < 0:
        raise DomainError(f"need dim >= 1 and k_max >= 0, got {dim}, {k_max}")
    return np.array(_multi_index_table(dim, k_max), dtype=int)


def eigenvalues(alpha: AlphaLike, indices: np.ndarray) -> np.ndarray:
    """4|k| + 2|alpha| + 2d for each row of indices."""
    alpha = as_alpha(alpha)
    return 4.0 * indices.sum(axis=-1) + 2.0 * alpha.sum() + 2.0 * alpha.size


@dataclass(frozen=True, eq=False)
class SpectralVector:
    """Coefficients c_k of sum c_k l_k^alpha over |k| <= k_max, in multi_indices order."""

    alpha: np.ndarray
    k_max: int
    indices: np.ndarray
    coeffs: np.ndarray
    parseval_defect: float | None = None

    def __post_init__(self) -> None:
        alpha = as_alpha(self.alpha)
        coeffs = np.array(self.coeffs)
        if coeffs.shape != (self.indices.shape[0],):
            raise DomainError(
                f"expected {self.indices.shape[0]} coefficients, got shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("spectral coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, alpha: AlphaLike, k_max: int, dtype: Any = float) -> SpectralVector:
        alpha = as_alpha(alpha)
        indices = multi_indices(alpha.size, k_max)
        return cls(alpha, k_max, indices, np.zeros(indices.shape[0], dtype=dtype))

    @classmethod
    def from_mapping(
        cls, alpha: AlphaLike, k_max: int, mapping: dict[tuple[int, ...], complex]
    ) -> SpectralVector:
        dtype = complex if any(np.iscomplex(list(mapping.values()))) else float
        base = cls.zeros(alpha, k_max, dtype)
        coeffs = np.array(base.coeffs)
        for k, value in mapping.items():
            coeffs[base.position(k)] = value
        return base.with_coeffs(coeffs)

    @classmethod
    def unit(cls, alpha: AlphaLike, k_max: int, k: IndexLike) -> SpectralVector:
        alpha = as_alpha(alpha)
        return cls.from_mapping(alpha, k_max, {tuple(as_multi_index(k, alpha.size)): 1.0})

    @property
    def dim(self) -> int:
        return self.alpha.size

    @property
    def eigenvalues(self) -> np.ndarray:
        return eigenvalues(self.alpha, self.indices)

    def position(self, k: IndexLike) -> int:
        k = as_multi_index(k, self.dim)
        if int(k.sum()) > self.k_max:
            raise DomainError(f"index {k.tolist()} exceeds the truncation |k| <= {self.k_max}")
        return _multi_index_table(self.dim, self.k_max).index(tuple(int(v) for v in k))

    def coefficient(self, k: IndexLike) -> complex | float:
        return self.coeffs[self.position(k)].item()

    def with_coeffs(self, coeffs: np.ndarray) -> SpectralVector:
        return replace(self, coeffs=np.asarray(coeffs), parseval_defect=None)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    @property
    def tail_indicator(self) -> float:
        """l^2 size of the outermost shell |k| = k_max."""
        last = self.indices.sum(axis=-1) == self.k_max
        return float(np.sqrt(np.sum(np.abs(self.coeffs[last]) ** 2)))


def basis_matrix(
    alpha: AlphaLike, indices: np.ndarray, x: Any, n: IndexLike | None = None
) -> np.ndarray:
    """delta^n l_k(x_p) with points along axis 0 and indices along axis 1."""
    alpha = as_alpha(alpha)
    points = as_points(x, alpha.size).reshape(-1, alpha.size)
    n = np.zeros(alpha.size, dtype=int) if n is None else as_multi_index(n, alpha.size)
    k_max = int(indices.max()) if indices.size else 0
    out = np.ones((points.shape[0], indices.shape[0]))
    for i in range(alpha.size):
        table = delta_laguerre_table(k_max, alpha[i], points[:, i], int(n[i]))
        out *= table[indices[:, i]].T
    return out


# -- input functions and projection -------------------------------------------------------


@dataclass(frozen=True)
class InputFunction:
    """A function on R_+^d, vectorized over leading axes, with an optional box support."""

    fn: Callable[[np.ndarray], np.ndarray]
    label: str
    support: tuple[tuple[float, float], ...] | None = None

    def __call__(self, x: Any) -> np.ndarray:
        return self.fn(np.asarray(x, dtype=float))


def laguerre_input(alpha: AlphaLike, k: IndexLike) -> InputFunction:
    alpha = as_alpha(alpha)
    k = as_multi_index(k, alpha.size)

    def fn(x: np.ndarray) -> np.ndarray:
        return basis_matrix(alpha, k[None, :], x).reshape(x.shape[:-1])

    return InputFunction(fn=fn, label=f"laguerre({k.tolist()})")


def gaussian_input(center: Sequence[float], width: float) -> InputFunction:
    """exp(-|x - center|^2 / width)."""
    c = np.asarray(center, dtype=float)
    if not width > 0.0:
        raise DomainError(f"width must be positive, got {width}")
    return InputFunction(
        fn=lambda x: np.exp(-np.sum((x - c) ** 2, axis=-1) / width),
        label=f"gaussian({c.tolist()}, {width:g})",
    )


def bump_input(center: Sequence[float], radius: float) -> InputFunction:
    """exp(1 - 1 / (1 - |x - center|^2 / radius^2)) inside the ball, 0 outside."""
    c = np.asarray(center, dtype=float)
    if not radius > 0.0:
        raise DomainError(f"radius must be positive, got {radius}")

    def fn(x: np.ndarray) -> np.ndarray:
        r2 = np.sum((x - c) ** 2, axis=-1) / radius**2
        inside = r2 < 1.0
        out = np.zeros(r2.shape)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out

    support = tuple((max(ci - radius, 0.0), ci + radius) for ci in c)
    return InputFunction(fn=fn, label=f"bump({c.tolist()}, {radius:g})", support=support)


def heat_input(
    alpha: AlphaLike, s: float, center: Sequence[float], cutoff: float = 1e-14
) -> InputFunction:
    """G_s(x, center) cut to the box where its Gaussian factor exceeds cutoff.

    Its coefficients are e^(-s lambda_k) l_k(center), so truncated expansions
    converge geometrically, unlike those of compact bumps.
    """
    alpha = as_alpha(alpha)
    c = np.asarray(center, dtype=float)
    if not s > 0.0 or not 0.0 < cutoff < 1.0:
        raise DomainError(f"need s > 0 and cutoff in (0, 1), got {s}, {cutoff}")
    if c.shape != alpha.shape or np.any(c <= 0.0):
        raise DomainError(f"center must be a point of R_+^{alpha.size}, got {c.tolist()}")
    radius = math.sqrt(4.0 * s * math.log(1.0 / cutoff))
    support = tuple((max(ci - radius, 0.0), ci + radius) for ci in c)
    lo = np.array([a for a, _ in support])
    hi = np.array([b for _, b in support])

    def fn(x: np.ndarray) -> np.ndarray:
        inside = np.all((x >= lo) & (x <= hi), axis=-1)
        return np.where(inside, np.asarray(heat_kernel_closed(alpha, s, x, c)), 0.0)

    return InputFunction(fn=fn, label=f"heat({s:g}, {c.tolist()})", support=support)


def _rule_points(rule: QuadRule | ProductRule) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(rule, QuadRule):
        rule.require(DomainTag.MU_MEASURE)
        return rule.nodes[:, None], rule.weights
    for factor in rule.factors:
        factor.require(DomainTag.MU_MEASURE)
    return rule.tensor()


def input_rule(
    alpha: AlphaLike, k_max: int, f: InputFunction | None = None, panels: int = 16, points: int = 16
) -> ProductRule:
    """mu_alpha rule suited to f: composite on a bounded support, Gauss-Laguerre otherwise."""
    alpha = as_alpha(alpha)
    if f is not None and f.support is not None:
        return ProductRule(
            tuple(
                mu_composite_rule(a, lo, hi, panels, points)
                for a, (lo, hi) in zip(alpha, f.support)
            )
        )
    n_nodes = min(150, max(2 * k_max + 20, 64))
    return ProductRule(tuple(mu_gauss_laguerre_rule(float(a), n_nodes) for a in alpha))


def project(
    f: Callable[[np.ndarray], np.ndarray],
    alpha: AlphaLike,
    k_max: int | None = None,
    rule: QuadRule | ProductRule | None = None,
) -> SpectralVector:
    """Fourier-Laguerre coefficients <f, l_k> in L^2(d mu_alpha) by quadrature.

    The Parseval defect ||f||^2 - sum |c_k|^2 on the same rule is attached.
    """
    alpha = as_alpha(alpha)
    k_max = settings.OPERATOR_K_MAX if k_max is None else int(k_max)
    if rule is None:
        rule = input_rule(alpha, k_max, f if isinstance(f, InputFunction) else None)
    nodes, weights = _rule_points(rule)
    if nodes.shape[-1] != alpha.size:
        raise DomainError(f"rule lives in R^{nodes.shape[-1]}, alpha in R^{alpha.size}")
    values = np.asarray(f(nodes))
    indices = multi_indices(alpha.size, k_max)
    basis = basis_matrix(alpha, indices, nodes)
    coeffs = basis.T @ (values * weights)
    norm2 = float(np.sum(np.abs(values) ** 2 * weights))
    defect = abs(norm2 - float(np.sum(np.abs(coeffs) ** 2)))
    logger.debug("projected onto |k| <= %s with Parseval defect %s", k_max, defect)
    return replace(
        SpectralVector(alpha, k_max, indices, coeffs), parseval_defect=defect
    )


def synthesize(v: SpectralVector, x: Any, n: IndexLike | None = None) -> np.ndarray | float:
    """sum c_k delta^n l_k(x) at points x (trailing axis d)."""
    x = np.asarray(x, dtype=float)
    values = basis_matrix(v.alpha, v.indices, x, n) @ v.coeffs
    values = values.reshape(x.shape[:-1])
    return values.item() if values.ndim == 0 else values


# -- operators ----------------------------------------------------------------------------


def heat_apply(v: SpectralVector, t: float) -> SpectralVector:
    if not t >= 0.0:
        raise DomainError(f"t must be nonnegative, got {t}")
    return v.with_coeffs(v.coeffs * np.exp(-t * v.eigenvalues))


def maximal_apply(v: SpectralVector, x: Any, t_grid: QuadRule | None = None) -> float:
    """sup over t of |T_t f(x)|, including the limit t -> 0+.

    The sup is taken on the t_grid nodes (default: the heat_max grid) and refined
    by a bounded search around the grid maximum.
    """
    x = np.asarray(x, dtype=float)
    row = basis_matrix(v.alpha, v.indices, x)[0] * v.coeffs
    lam = v.eigenvalues
    if t_grid is None:
        window = TWindow(settings.HEAT_MAX_T_MIN, settings.HEAT_MAX_T_MAX)
        points = settings.HEAT_MAX_GRID_POINTS
    else:
        window = TWindow(float(t_grid.nodes.min()), float(t_grid.nodes.max()))
        points = len(t_grid)

    def profile(t: np.ndarray) -> np.ndarray:
        return np.exp(-np.multiply.outer(t, lam)) @ row

    sup, _ = refined_sup(profile, window, points)
    return max(sup, float(abs(row.sum())))


def riesz_apply(v: SpectralVector, n: IndexLike, x: Any) -> np.ndarray | float:
    """sum lambda_k^(-|n|/2) c_k delta^n l_k(x)."""
    n = as_multi_index(n, v.dim)
    if int(n.sum()) == 0:
        raise DomainError("Riesz transforms need |n| > 0")
    scaled = v.with_coeffs(v.coeffs * v.eigenvalues ** (-int(n.sum()) / 2.0))
    return synthesize(scaled, x, n)


def gfun_default_rule(v: SpectralVector, W: float) -> QuadRule:
    t_max = math.log(1.0 / settings.ENVELOPE_CUTOFF) / float(v.eigenvalues.min())
    t_min = 1e-8 / float(v.eigenvalues.max())
    panels = max(settings.T_PANELS, math.ceil(3.0 * math.log(t_max / t_min)))
    return t_weighted_grid(W, t_min, t_max, panels)


def gfun_apply(
    v: SpectralVector, n: IndexLike, m: int, x: Any, t_rule: QuadRule | None = None
) -> float:
    """L^2(t^(|n|+2m-1) dt) norm of sum (-lambda_k)^m e^{-t lambda_k} c_k delta^n l_k(x)."""
    n = as_multi_index(n, v.dim)
    if int(n.sum()) + m <= 0 or m < 0:
        raise DomainError(f"g-functions need |n| + m > 0, got n={n.tolist()}, m={m}")
    W = float(int(n.sum()) + 2 * m)
    rule = gfun_default_rule(v, W) if t_rule is None else t_rule
    rule.require(DomainTag.T_WEIGHTED)
    if abs(rule.param[0] - W) > 1e-12:
        raise DomainError(f"t-rule carries weight exponent {rule.param[0]}, expected {W}")
    lam = v.eigenvalues
    row = basis_matrix(v.alpha, v.indices, np.asarray(x, dtype=float), n)[0] * v.coeffs
    row = row * (-lam) ** m
    values = np.exp(-np.multiply.outer(rule.nodes, lam)) @ row
    return float(math.sqrt(float(np.abs(values) ** 2 @ rule.weights)))


class SymbolKind(StrEnum):
    LAPLACE = "laplace"
    STIELTJES = "stieltjes"
    EXPLICIT = "explicit"


def laplace_symbol(psi: PsiFunction, z: Any, tol: float = 1e-13) -> np.ndarray:
    """m(z) = z * integral of e^{-tz} psi(t) dt for z > 0.

    With t = e^u / z this is the integral of e^{u - e^u} psi(e^u / z) du; jumps of
    psi split the u-range.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(~(z > 0.0)):
        raise DomainError("Laplace-type symbols are evaluated at z > 0")
    lo, hi = _LAPLACE_U_RANGE
    out = []
    for zi in z:
        cuts = sorted(math.log(p * zi) for p in psi.breakpoints if lo < math.log(p * zi) < hi)
        edges = [lo, *cuts, hi]
        total: Any = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            total += adaptive_integrate(
                lambda u, zi=zi: np.exp(u - np.exp(u)) * psi(np.exp(u) / zi), a, b, tol
            )
        out.append(total)
    return np.asarray(out)


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """Spectral multiplier m(z), evaluated lazily at eigenvalues."""

    kind: SymbolKind
    psi: PsiFunction | None = None
    nu: NuMeasure | None = None
    fn: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = ""

    @classmethod
    def laplace(cls, psi: PsiFunction) -> MultiplierSymbol:
        return cls(SymbolKind.LAPLACE, psi=psi, label=f"laplace({psi.label})")

    @classmethod
    def stieltjes(cls, nu: NuMeasure) -> MultiplierSymbol:
        return cls(SymbolKind.STIELTJES, nu=nu, label=f"stieltjes({nu.label or 'nu'})")

    @classmethod
    def explicit(
        cls, fn: Callable[[np.ndarray], np.ndarray], label: str = "explicit"
    ) -> MultiplierSymbol:
        return cls(SymbolKind.EXPLICIT, fn=fn, label=label)

    def __call__(self, z: Any) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        match self.kind:
            case SymbolKind.LAPLACE:
                return laplace_symbol(self.psi, z)
            case SymbolKind.STIELTJES:
                return np.asarray(self.nu.laplace(z))
        return np.asarray(self.fn(z))


def multiplier_apply(v: SpectralVector, sym: MultiplierSymbol) -> SpectralVector:
    """Coefficientwise multiplication by m(lambda_k)."""
    if sym.kind == SymbolKind.STIELTJES:
        sym.nu.check_admissible(v.alpha)
    lam = v.eigenvalues
    distinct, inverse = np.unique(lam, return_inverse=True)
    values = sym(distinct)[inverse]
    if sym.kind == SymbolKind.LAPLACE:
        excess = float(np.max(np.abs(values))) - sym.psi.bound
        if excess > 1e-8 * max(sym.psi.bound, 1.0):
            logger.warning("symbol %s exceeds its bound by %s", sym.label, excess)
    return v.with_coeffs(v.coeffs * values)


# -- truncated Riesz operator norm --------------------------------------------------------


def _delta_gram_1d(a: float, k_max: int, n: int) -> np.ndarray:
    """<delta^n l_j^a, delta^n l_k^a> in L^2(d mu_a), exact by Gauss-Laguerre."""
    rule = mu_gauss_laguerre_rule(a, min(150, k_max + n + 2))
    table = delta_laguerre_table(k_max, a, rule.nodes, n)
    return (table * rule.weights) @ table.T


def riesz_operator_norm(alpha: AlphaLike, n: IndexLike, k_max: int) -> float:
    """Operator norm of R_n restricted to span{l_k : |k| <= k_max}."""
    alpha = as_alpha(alpha)
    n = as_multi_index(n, alpha.size)
    if int(n.sum()) == 0:
        raise DomainError("Riesz transforms need |n| > 0")
    indices = multi_indices(alpha.size, k_max)
    gram = np.ones((indices.shape[0], indices.shape[0]))
    for i in range(alpha.size):
        g = _delta_gram_1d(float(alpha[i]), k_max, int(n[i]))
        gram *= g[np.ix_(indices[:, i], indices[:, i])]
    scale = eigenvalues(alpha, indices) ** (-int(n.sum()) / 2.0)
    gram *= np.outer(scale, scale)
    return float(math.sqrt(max(float(np.linalg.eigvalsh(gram)[-1]), 0.0)))


# -- kernel-side applications -------------------------------------------------------------


def heat_kernel_apply(
    alpha: AlphaLike,
    t: float,
    f: Callable[[np.ndarray], np.ndarray],
    x: Any,
    rule: QuadRule | ProductRule,
) -> float:
    """Integral of G_t(x, y) f(y) d mu_alpha(y) on the rule."""
    nodes, weights = _rule_points(rule)
    values = np.asarray(heat_kernel_closed(alpha, t, np.asarray(x, dtype=float), nodes))
    return float((values * np.asarray(f(nodes))) @ weights)


def riesz_kernel_apply(
    alpha: AlphaLike,
    n: IndexLike,
    f: InputFunction,
    x: Any,
    rule: QuadRule | ProductRule | None = None,
) -> np.ndarray | float:
    """Integral of K_n(x, y) f(y) d mu_alpha(y) at points x off the support of f."""
    alpha = as_alpha(alpha)
    if f.support is None:
        raise DomainError("kernel-side Riesz application needs a compactly supported f")
    rule = rule or input_rule(alpha, 0, f, panels=8, points=8)
    nodes, weights = _rule_points(rule)
    points = np.atleast_2d(np.asarray(x, dtype=float))
    keep = np.asarray(f(nodes)) != 0.0
    nodes, weights = nodes[keep], weights[keep] * np.asarray(f(nodes))[keep]
    xs = np.repeat(points, nodes.shape[0], axis=0)
    ys = np.tile(nodes, (points.shape[0], 1))
    kernel = riesz_kernel_batch(alpha, n, xs, ys).reshape(points.shape[0], nodes.shape[0])
    values = kernel @ weights
    return values.item() if np.ndim(x) == 1 else values


def riesz_pairing(
    alpha: AlphaLike, n: IndexLike, f: InputFunction, g: InputFunction, k_max: int
) -> tuple[float, float]:
    """<R_n f, g> spectrally and by double quadrature of the kernel; supports must be apart."""
    alpha = as_alpha(alpha)
    g_nodes, g_weights = _rule_points(input_rule(alpha, 0, g, panels=8, points=8))
    g_weights = g_weights * np.asarray(g(g_nodes))
    spectral = float(np.asarray(riesz_apply(project(f, alpha, k_max), n, g_nodes)) @ g_weights)
    kernel_side = float(np.asarray(riesz_kernel_apply(alpha, n, f, g_nodes)) @ g_weights)
    return spectral, kernel_side
