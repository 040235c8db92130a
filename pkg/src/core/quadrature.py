"""Quadrature rules for Pi_nu on [-1, 1], t-weighted half-line integrals and mu_alpha."""

from __future__ import annotations

import heapq
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import special

from src.config import settings
from src.core.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

ATOM_WEIGHT = 1.0 / math.sqrt(2.0 * math.pi)

# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15)
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.0,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.0,
        0.129484966168869693270611432679082,
        0.0,
        0.279705391489276667901467771423780,
        0.0,
        0.381830050505118944950369775488975,
        0.0,
        0.417959183673469387755102040816327,
    ]
)
_GK_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_GK_KRONROD = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GK_GAUSS = np.concatenate([_WG[:-1], [_WG[-1]], _WG[:-1][::-1]])


class DomainTag(StrEnum):
    PI_MEASURE = "pi_measure"
    T_WEIGHTED = "t_weighted"
    GENERIC = "generic"
    MU_MEASURE = "mu_measure"


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Nodes and strictly positive weights tagged with the measure they integrate against.

    `param` carries the tag arguments: (nu,) for pi_measure, (W, t_min, t_max) for
    t_weighted, (a, b) for generic and (alpha_i,) for mu_measure.
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain_tag: DomainTag
    param: tuple[float, ...] = ()
    atomic: bool = False

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0 or nodes.shape != weights.shape:
            raise DomainError("rule needs equally long, non-empty node and weight vectors")
        if not np.all(weights > 0.0):
            raise DomainError("rule weights must be strictly positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def log_weights(self) -> np.ndarray:
        return np.log(self.weights)

    def integrate(self, f: Callable[[np.ndarray], Any]) -> Any:
        """Sum of w_i f(x_i); f is evaluated once on the node vector (last axis)."""
        values = np.asarray(f(self.nodes))
        return values @ self.weights

    def require(self, tag: DomainTag) -> None:
        if self.domain_tag != tag:
            raise DomainError(f"expected a {tag} rule, got {self.domain_tag}")


@dataclass(frozen=True, eq=False)
class ProductRule:
    """Tensor product of one rule per coordinate."""

    factors: tuple[QuadRule, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return len(self.factors)

    def tensor(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened nodes of shape (N, d) and product weights of shape (N,)."""
        if "tensor" not in self._cache:
            grids = np.meshgrid(*[rule.nodes for rule in self.factors], indexing="ij")
            nodes = np.stack([g.ravel() for g in grids], axis=-1)
            log_w = sum(
                np.meshgrid(*[rule.log_weights for rule in self.factors], indexing="ij")
            ).ravel()
            self._cache["tensor"] = (nodes, log_w)
        nodes, log_w = self._cache["tensor"]
        return nodes, np.exp(log_w)

    def log_tensor(self) -> tuple[np.ndarray, np.ndarray]:
        self.tensor()
        return self._cache["tensor"]


def _pi_normalizer(nu: float) -> float:
    """log of sqrt(pi) 2^nu Gamma(nu + 1/2)."""
    return 0.5 * math.log(math.pi) + nu * math.log(2.0) + special.gammaln(nu + 0.5)


def pi_total_mass(nu: float) -> float:
    """Pi_nu([-1, 1]) = 1 / (2^nu Gamma(nu + 1))."""
    return math.exp(-nu * math.log(2.0) - special.gammaln(nu + 1.0))


def _atomic_rule(nu: float) -> QuadRule:
    return QuadRule(
        nodes=np.array([-1.0, 1.0]),
        weights=np.array([ATOM_WEIGHT, ATOM_WEIGHT]),
        domain_tag=DomainTag.PI_MEASURE,
        param=(nu,),
        atomic=True,
    )


def _check_pi_order(nu: float) -> bool:
    """True for the atomic order -1/2."""
    if not math.isfinite(nu) or nu < -0.5 - 1e-14:
        raise DomainError(
            f"Pi_nu needs nu >= -1/2, got {nu}; shift the order by the epsilon-decomposition"
        )
    return abs(nu + 0.5) <= 1e-14


@lru_cache(maxsize=256)
def pi_measure_rule(nu: float, n_nodes: int = settings.PI_NODES) -> QuadRule:
    """Gauss rule for Pi_nu(ds) = (1 - s^2)^(nu - 1/2) ds / (sqrt(pi) 2^nu Gamma(nu + 1/2))."""
    nu = float(nu)
    if _check_pi_order(nu):
        return _atomic_rule(-0.5)
    if n_nodes < 1:
        raise DomainError(f"n_nodes must be positive, got {n_nodes}")
    nodes, weights = special.roots_jacobi(int(n_nodes), nu - 0.5, nu - 0.5)
    weights = weights * math.exp(-_pi_normalizer(nu))
    return QuadRule(nodes=nodes, weights=weights, domain_tag=DomainTag.PI_MEASURE, param=(nu,))


@lru_cache(maxsize=64)
def pi_measure_graded_rule(
    nu: float, levels: int = settings.GRADED_LEVELS, points: int = settings.GRADED_POINTS
) -> QuadRule:
    """Composite Pi_nu rule with panels halving in width toward both endpoints.

    End panels use Gauss-Jacobi on the endpoint power, interior panels
    Gauss-Legendre times the density. Resolves integrands peaked at s = +-1.
    """
    nu = float(nu)
    if _check_pi_order(nu):
        return _atomic_rule(-0.5)
    beta = nu - 0.5
    log_norm = _pi_normalizer(nu)
    sigma = np.concatenate([[0.0], 2.0 ** -np.arange(levels, 0, -1, dtype=float), [1.0]])
    gl_x, gl_w = special.roots_legendre(points)
    gj_x, gj_w = special.roots_jacobi(points, 0.0, beta)

    left_nodes, left_weights = [], []
    # Left end panel: (1 + s)^beta absorbed by Gauss-Jacobi.
    h = sigma[1]
    s = -1.0 + h * (gj_x + 1.0) / 2.0
    left_nodes.append(s)
    left_weights.append(gj_w * (h / 2.0) ** (beta + 1.0) * (1.0 - s) ** beta)
    for lo, hi in zip(sigma[1:-1], sigma[2:]):
        offset = lo + (hi - lo) * (gl_x + 1.0) / 2.0
        left_nodes.append(-1.0 + offset)
        left_weights.append(gl_w * (hi - lo) / 2.0 * (offset * (2.0 - offset)) ** beta)
    left_s = np.concatenate(left_nodes)
    left_w = np.concatenate(left_weights)
    nodes = np.concatenate([left_s, -left_s[::-1]])
    weights = np.concatenate([left_w, left_w[::-1]]) * math.exp(-log_norm)
    return QuadRule(nodes=nodes, weights=weights, domain_tag=DomainTag.PI_MEASURE, param=(nu,))


def schlafli_bessel(nu: float, z: float | np.ndarray, rule: QuadRule) -> float | np.ndarray:
    """exp(-z) z^nu * integral of exp(-z s) Pi_nu(ds), evaluated in log space."""
    rule.require(DomainTag.PI_MEASURE)
    if abs(rule.param[0] - nu) > 1e-12:
        raise DomainError(f"rule was built for nu={rule.param[0]}, not nu={nu}")
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr > 0.0)):
        raise DomainError(f"Schlafli representation needs z > 0, got {z}")
    exponent = -z_arr[..., None] * (1.0 + rule.nodes) + rule.log_weights
    out = np.exp(nu * np.log(z_arr) + special.logsumexp(exponent, axis=-1))
    return float(out) if out.ndim == 0 else out


def gauss_legendre_rule(a: float, b: float, n: int) -> QuadRule:
    return composite_rule(a, b, 1, n)


def composite_rule(a: float, b: float, panels: int, n: int) -> QuadRule:
    """Gauss-Legendre on equal panels of [a, b]."""
    if not b > a:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    x, w = special.roots_legendre(n)
    edges = np.linspace(a, b, panels + 1)
    half = np.diff(edges)[:, None] / 2.0
    nodes = (edges[:-1, None] + half * (x + 1.0)).ravel()
    weights = (half * w).ravel()
    return QuadRule(nodes=nodes, weights=weights, domain_tag=DomainTag.GENERIC, param=(a, b))


def _log_panels(t_min: float, t_max: float, n: int, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes t and weights for dt/t on log-uniform panels."""
    x, w = special.roots_legendre(points)
    edges = np.linspace(math.log(t_min), math.log(t_max), n + 1)
    half = np.diff(edges)[:, None] / 2.0
    s = (edges[:-1, None] + half * (x + 1.0)).ravel()
    return np.exp(s), (half * w).ravel()


def t_weighted_grid(
    W: float, t_min: float, t_max: float, n: int = settings.T_PANELS, points: int | None = None
) -> QuadRule:
    """Rule for the integral of f(t) t^(W-1) dt over [t_min, t_max] on n log panels."""
    if not t_min > 0.0:
        raise DomainError(f"t_min must be positive, got {t_min}")
    if not t_max > t_min:
        raise DomainError(f"t_max must exceed t_min, got [{t_min}, {t_max}]")
    if n < 1:
        raise DomainError(f"panel count must be positive, got {n}")
    t, w = _log_panels(t_min, t_max, n, points or settings.T_PANEL_POINTS)
    return QuadRule(
        nodes=t,
        weights=w * t**W,
        domain_tag=DomainTag.T_WEIGHTED,
        param=(float(W), float(t_min), float(t_max)),
    )


def integrate_t_weighted(
    f: Callable[[np.ndarray], Any],
    W: float,
    t_min: float,
    t_max: float,
    n: int = settings.T_PANELS,
    tol: float | None = None,
) -> tuple[Any, float]:
    """Value on 2n panels and the change from n panels as its error estimate."""
    coarse = t_weighted_grid(W, t_min, t_max, n).integrate(f)
    fine = t_weighted_grid(W, t_min, t_max, 2 * n).integrate(f)
    error = float(np.max(np.abs(np.asarray(fine) - np.asarray(coarse))))
    if tol is not None and error > tol:
        raise ConvergenceError(
            f"t-integral changed by {error:.3e} under panel doubling (tol {tol:.1e})",
            best_estimate=fine,
            achieved_tolerance=error,
        )
    return fine, error


def _gk15(f: Callable[[np.ndarray], Any], a: float, b: float) -> tuple[Any, float]:
    centre, half = (a + b) / 2.0, (b - a) / 2.0
    x = centre + half * _GK_NODES
    fx = np.asarray(f(x))
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    kronrod = half * (fx @ _GK_KRONROD)
    gauss = half * (fx @ _GK_GAUSS)
    error = abs(kronrod - gauss)
    if not np.isfinite(error):
        error = math.inf
    return kronrod, float(error)


def adaptive_quad(
    f: Callable[[np.ndarray], Any],
    a: float,
    b: float,
    tol: float,
    *,
    rel_tol: float = 0.0,
    max_intervals: int | None = None,
) -> tuple[Any, float]:
    """Globally adaptive Gauss-Kronrod 7/15 with bisection of the worst panel.

    f is called once per panel on all 15 abscissae and may return complex values;
    scipy.integrate.quad takes one real point per call. The error is measured in
    modulus. Returns (value, error estimate).
    """
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    if not b > a:
        if a == b:
            return 0.0, 0.0
        value, error = adaptive_quad(f, b, a, tol, rel_tol=rel_tol, max_intervals=max_intervals)
        return -value, error
    limit = max_intervals or settings.ADAPTIVE_MAX_INTERVALS

    value, error = _gk15(f, a, b)
    heap: list[tuple[float, int, float, float, Any]] = [(-error, 0, a, b, value)]
    total, total_error = value, error
    counter = 1
    while total_error > max(tol, rel_tol * abs(total)):
        if len(heap) >= limit:
            logger.debug("adaptive quadrature on [%s, %s] stopped at %s panels", a, b, len(heap))
            raise ConvergenceError(
                f"adaptive quadrature on [{a}, {b}] reached {limit} panels "
                f"with error {total_error:.3e} > {tol:.1e}",
                best_estimate=total,
                achieved_tolerance=total_error,
            )
        neg_err, _, lo, hi, panel_value = heapq.heappop(heap)
        mid = (lo + hi) / 2.0
        if not lo < mid < hi:
            raise ConvergenceError(
                f"adaptive quadrature cannot bisect [{lo}, {hi}] any further",
                best_estimate=total,
                achieved_tolerance=total_error,
            )
        left_value, left_error = _gk15(f, lo, mid)
        right_value, right_error = _gk15(f, mid, hi)
        heapq.heappush(heap, (-left_error, counter, lo, mid, left_value))
        heapq.heappush(heap, (-right_error, counter + 1, mid, hi, right_value))
        counter += 2
        total = total - panel_value + left_value + right_value
        total_error = total_error + neg_err + left_error + right_error
        if counter % 512 == 1:
            # resum to keep cancellation drift out of the running totals
            total = sum(item[4] for item in heap)
            total_error = sum(-item[0] for item in heap)
    return total, total_error


def adaptive_integrate(
    f: Callable[[np.ndarray], Any],
    a: float,
    b: float,
    tol: float,
    *,
    rel_tol: float = 0.0,
    max_intervals: int | None = None,
) -> Any:
    value, _ = adaptive_quad(f, a, b, tol, rel_tol=rel_tol, max_intervals=max_intervals)
    return complex(value) if np.iscomplexobj(value) else float(value)


@lru_cache(maxsize=128)
def mu_gauss_laguerre_rule(a: float, n: int) -> QuadRule:
    """Rule against x^(2a+1) dx on (0, inf) from generalized Gauss-Laguerre in u = x^2.

    Integrates g(x) e^{-x^2} x^(2a+1) exactly when g is a polynomial in x^2 of
    degree <= 2n - 1; in particular l_j^a l_k^a for j + k <= 2n - 1.
    """
    if not a > -1.0:
        raise DomainError(f"mu parameter must exceed -1, got {a}")
    if not 1 <= n <= 150:
        raise DomainError(f"Gauss-Laguerre node count must lie in [1, 150], got {n}")
    u, w = special.roots_genlaguerre(int(n), float(a))
    weights = 0.5 * np.exp(np.log(w) + u)
    return QuadRule(nodes=np.sqrt(u), weights=weights, domain_tag=DomainTag.MU_MEASURE, param=(a,))


def mu_composite_rule(a: float, lo: float, hi: float, panels: int = 16, n: int = 16) -> QuadRule:
    """Rule against x^(2a+1) dx on [lo, hi]; a first panel starting at 0 uses Gauss-Jacobi."""
    if not a > -1.0:
        raise DomainError(f"mu parameter must exceed -1, got {a}")
    if not (0.0 <= lo < hi):
        raise DomainError(f"need 0 <= lo < hi, got [{lo}, {hi}]")
    edges = np.linspace(lo, hi, panels + 1)
    x, w = special.roots_legendre(n)
    nodes, weights = [], []
    for left, right in zip(edges[:-1], edges[1:]):
        half = (right - left) / 2.0
        if left == 0.0:
            gx, gw = special.roots_jacobi(n, 0.0, 2.0 * a + 1.0)
            nodes.append(half * (gx + 1.0))
            weights.append(gw * half ** (2.0 * a + 2.0))
        else:
            xs = left + half * (x + 1.0)
            nodes.append(xs)
            weights.append(w * half * xs ** (2.0 * a + 1.0))
    return QuadRule(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        domain_tag=DomainTag.MU_MEASURE,
        param=(a,),
    )
