"""Laguerre heat and Poisson kernels: closed form, eigen-series and Schlafli forms."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import special

from src.config import settings
from src.core.exceptions import DomainError, TruncationError
from src.core.measure_geometry import random_triples
from src.core.models import AlphaLike, IndexLike, PointLike, as_alpha, as_multi_index, as_point
from src.core.numdiff import richardson_derivative
from src.core.quadrature import ProductRule, adaptive_quad, pi_measure_graded_rule, pi_measure_rule
from src.core.reports import SampleReport
from src.core.special_fn import bessel_ratio, laguerre_fn_table, log_bessel_i_scaled

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)
MAX_DERIVATIVE_ORDER = 4
POISSON_K_CAP = 20000

# e^{-w^2} is below 1e-21 past this point of the subordination integral.
_SUBORDINATION_W_MAX = 7.0
_RICHARDSON_LEVELS = 3


# -- time variable ------------------------------------------------------------------------


@dataclass(frozen=True)
class ZetaTime:
    """t > 0 with zeta = tanh t; complement is 1 - zeta computed without cancellation."""

    t: float
    zeta: float
    complement: float


def zeta_of_t(t: float) -> ZetaTime:
    t = float(t)
    if not (math.isfinite(t) and t > 0.0):
        raise DomainError(f"t must be a positive finite number, got {t}")
    e = math.exp(-2.0 * t)
    return ZetaTime(t=t, zeta=math.tanh(t), complement=2.0 * e / (1.0 + e))


def t_of_zeta(zeta: float, complement: float | None = None) -> ZetaTime:
    """Inverse of zeta_of_t.

    tanh saturates to 1.0 in double precision for t > 19; passing the complement
    1 - zeta keeps the inversion exact there.
    """
    zeta = float(zeta)
    if complement is None:
        if not 0.0 < zeta < 1.0:
            raise DomainError(f"zeta must lie in (0, 1), got {zeta}")
        complement = 1.0 - zeta
    else:
        complement = float(complement)
        if not (0.0 < zeta <= 1.0 and 0.0 < complement < 1.0):
            raise DomainError(
                f"need zeta in (0, 1] and 1 - zeta in (0, 1), got {zeta}, {complement}"
            )
    if zeta < 0.5:
        t = math.atanh(zeta)
    else:
        t = 0.5 * (math.log(2.0 - complement) - math.log(complement))
    return ZetaTime(t=t, zeta=zeta, complement=complement)


def _check_t(t: float | np.ndarray) -> np.ndarray:
    t_arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t_arr) | (t_arr <= 0.0)):
        raise DomainError(f"t must be positive and finite, got {t}")
    return t_arr


def log_sinh_2t(t: float | np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return 2.0 * t - LOG2 + np.log(-np.expm1(-4.0 * t))


# -- q forms ------------------------------------------------------------------------------


@dataclass(frozen=True)
class QForms:
    q_plus: float | np.ndarray
    q_minus: float | np.ndarray


def _check_s(s: Any, dim: int) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim == 0 or s.shape[-1] != dim:
        raise DomainError(f"s must have trailing dimension {dim}, got shape {s.shape}")
    if np.any(~(np.abs(s) <= 1.0)):
        raise DomainError("s must lie in [-1, 1]^d")
    return s


def q_forms(x: Any, y: Any, s: Any) -> QForms:
    """q_(+-)(x, y, s) = |x|^2 + |y|^2 +- 2 sum x_i y_i s_i, batched over leading axes.

    Written as sum (x_i +- y_i s_i)^2 + y_i^2 (1 - s_i^2) so both stay nonnegative.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 0 or y.ndim == 0 or x.shape[-1] != y.shape[-1]:
        raise DomainError(f"x and y dimensions disagree: {x.shape} vs {y.shape}")
    s = _check_s(s, x.shape[-1])
    rest = y * y * (1.0 - s * s)
    q_plus = np.sum((x + y * s) ** 2 + rest, axis=-1)
    q_minus = np.sum((x - y * s) ** 2 + rest, axis=-1)
    if np.ndim(q_plus) == 0:
        return QForms(q_plus=float(q_plus), q_minus=float(q_minus))
    return QForms(q_plus=q_plus, q_minus=q_minus)


@dataclass(frozen=True)
class PsiPhi:
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray


def psi_phi(x: Any, y: Any, s: Any) -> PsiPhi:
    """Coordinatewise x_j +- y_j s_j and y_j +- x_j s_j."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = _check_s(s, x.shape[-1])
    return PsiPhi(psi_plus=x + y * s, psi_minus=x - y * s, phi_plus=y + x * s, phi_minus=y - x * s)


def exp_form(zeta: Any, q_plus: Any, q_minus: Any) -> np.ndarray:
    """exp(-q_+ / (4 zeta) - zeta q_- / 4)."""
    zeta = np.asarray(zeta, dtype=float)
    return np.exp(-np.asarray(q_plus) / (4.0 * zeta) - zeta * np.asarray(q_minus) / 4.0)


# -- closed form --------------------------------------------------------------------------


@dataclass(frozen=True)
class _ClosedForm:
    """Pieces of log G_t shared by the value and its analytic derivatives.

    Per-time arrays have shape T, per-coordinate arrays T + (d,) after broadcasting
    against the batch axes of x and y.
    """

    log_sinh: np.ndarray
    zeta: np.ndarray
    complement: np.ndarray
    csch: np.ndarray
    z: np.ndarray
    log_z: np.ndarray
    log_value: np.ndarray


def _closed_form(alpha: np.ndarray, t: Any, x: np.ndarray, y: np.ndarray) -> _ClosedForm:
    t = _check_t(t)
    ls = log_sinh_2t(t)
    tb = t[..., None]
    zeta = np.tanh(tb)
    e = np.exp(-2.0 * tb)
    complement = 2.0 * e / (1.0 + e)
    log_xy = np.log(x * y)
    log_z = log_xy - ls[..., None]
    z = np.exp(log_z)
    gauss = (x - y) ** 2 / (4.0 * zeta) + zeta * (x + y) ** 2 / 4.0
    bessel = np.asarray(log_bessel_i_scaled(alpha, z, log_z)) - alpha * log_xy
    log_value = -alpha.size * ls + np.sum(bessel - gauss, axis=-1)
    return _ClosedForm(
        log_sinh=ls,
        zeta=zeta,
        complement=complement,
        csch=np.exp(-ls)[..., None],
        z=z,
        log_z=log_z,
        log_value=log_value,
    )


def _as_output(value: np.ndarray) -> float | np.ndarray:
    return float(value) if np.ndim(value) == 0 else value


def _points(alpha: AlphaLike, x: Any, y: Any) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    alpha = as_alpha(alpha)
    x = np.asarray(x.coords if hasattr(x, "coords") else x, dtype=float)
    y = np.asarray(y.coords if hasattr(y, "coords") else y, dtype=float)
    for p in (x, y):
        if p.ndim == 0 or p.shape[-1] != alpha.size:
            raise DomainError(f"points must have trailing dimension {alpha.size}, got {p.shape}")
        if not np.all(np.isfinite(p) & (p > 0.0)):
            raise DomainError("points of R_+^d need strictly positive coordinates")
    return alpha, x, y


def log_heat_kernel_closed(alpha: AlphaLike, t: Any, x: Any, y: Any) -> float | np.ndarray:
    """log G_t^alpha(x, y); t broadcasts against the batch axes of x and y."""
    alpha, x, y = _points(alpha, x, y)
    return _as_output(_closed_form(alpha, t, x, y).log_value)


def heat_kernel_closed(alpha: AlphaLike, t: Any, x: Any, y: Any) -> float | np.ndarray:
    """G_t^alpha(x, y) from the Bessel closed form, assembled in log space."""
    return _as_output(np.exp(log_heat_kernel_closed(alpha, t, x, y)))


# -- eigen-series -------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralSum:
    """Truncated eigen-series with its shell decomposition.

    shells[j] is the signed contribution of |k| = j; last_shell is the absolute
    size of the final shell, abs_sum the sum of absolute term sizes.
    """

    value: float
    last_shell: float
    abs_sum: float
    k_max: int
    shells: np.ndarray = field(repr=False)


def _raw_shells(
    alpha: np.ndarray, x: np.ndarray, y: np.ndarray, k_max: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sum over |k| = j of prod l_{k_i}(x_i) l_{k_i}(y_i), signed and absolute."""
    shells = abs_shells = None
    for i in range(alpha.size):
        terms = laguerre_fn_table(k_max, alpha[i], x[i]) * laguerre_fn_table(k_max, alpha[i], y[i])
        if shells is None:
            shells, abs_shells = terms, np.abs(terms)
        else:
            shells = np.convolve(shells, terms)[: k_max + 1]
            abs_shells = np.convolve(abs_shells, np.abs(terms))[: k_max + 1]
    return shells, abs_shells


def _shell_sum(
    shells: np.ndarray, abs_shells: np.ndarray, decay: np.ndarray, k_max: int, tol: float | None
) -> SpectralSum:
    terms = shells * decay
    abs_terms = abs_shells * decay
    result = SpectralSum(
        value=float(terms.sum()),
        last_shell=float(abs_terms[-1]),
        abs_sum=float(abs_terms.sum()),
        k_max=k_max,
        shells=terms,
    )
    if tol is not None and result.last_shell > tol * max(result.abs_sum, np.finfo(float).tiny):
        raise TruncationError(
            f"eigen-series truncated at K={k_max} with last shell {result.last_shell:.3e}",
            partial_sum=result.value,
            last_shell=result.last_shell,
            tol=tol,
        )
    return result


def heat_spectral_order(t: float, tol: float = 1e-14) -> int:
    """Smallest K with e^{-4tK} below tol, capped at SPECTRAL_K_MAX."""
    return int(min(math.ceil(math.log(1.0 / tol) / (4.0 * t)), settings.SPECTRAL_K_MAX))


def poisson_spectral_order(t: float, tol: float = 1e-10) -> int:
    return int(min(math.ceil((math.log(1.0 / tol) / t) ** 2 / 4.0), POISSON_K_CAP))


def heat_kernel_spectral(
    alpha: AlphaLike,
    t: float,
    x: PointLike,
    y: PointLike,
    K_max: int | None = None,
    tol: float | None = None,
) -> SpectralSum:
    """sum over |k| <= K_max of e^{-t lambda_k} l_k(x) l_k(y), summed shell by shell.

    tol is relative to the absolute series size; a last shell above it raises
    TruncationError carrying the partial sum.
    """
    alpha = as_alpha(alpha)
    x = as_point(x, alpha.size)
    y = as_point(y, alpha.size)
    t = float(_check_t(t))
    k_max = heat_spectral_order(t) if K_max is None else int(K_max)
    if k_max < 0:
        raise DomainError(f"K_max must be nonnegative, got {k_max}")
    logger.debug("heat eigen-series at t=%s truncated at K=%s", t, k_max)
    shells, abs_shells = _raw_shells(alpha, x, y, k_max)
    j = np.arange(k_max + 1)
    decay = np.exp(-t * (4.0 * j + 2.0 * alpha.sum() + 2.0 * alpha.size))
    return _shell_sum(shells, abs_shells, decay, k_max, tol)


def poisson_kernel_spectral(
    alpha: AlphaLike,
    t: float,
    x: PointLike,
    y: PointLike,
    K_max: int | None = None,
    tol: float | None = None,
) -> SpectralSum:
    """sum over |k| <= K_max of e^{-t sqrt(lambda_k)} l_k(x) l_k(y)."""
    alpha = as_alpha(alpha)
    x = as_point(x, alpha.size)
    y = as_point(y, alpha.size)
    t = float(_check_t(t))
    k_max = poisson_spectral_order(t) if K_max is None else int(K_max)
    logger.debug("Poisson eigen-series at t=%s truncated at K=%s", t, k_max)
    shells, abs_shells = _raw_shells(alpha, x, y, k_max)
    j = np.arange(k_max + 1)
    decay = np.exp(-t * np.sqrt(4.0 * j + 2.0 * alpha.sum() + 2.0 * alpha.size))
    return _shell_sum(shells, abs_shells, decay, k_max, tol)


# -- Schlafli forms -----------------------------------------------------------------------


@lru_cache(maxsize=128)
def _pi_product_rule(orders: tuple[float, ...], n_nodes: int, graded: bool) -> ProductRule:
    if graded:
        return ProductRule(tuple(pi_measure_graded_rule(nu) for nu in orders))
    return ProductRule(tuple(pi_measure_rule(nu, n_nodes) for nu in orders))


def heat_kernel_schlafli(
    alpha: AlphaLike,
    t: float,
    x: PointLike,
    y: PointLike,
    n_nodes: int = settings.PI_NODES,
    graded: bool = False,
) -> float:
    """G_t as the sum over eps in {0, 1}^d of Pi_(alpha+1+eps) integrals of Exp(zeta, q).

    Each term carries prod [2(alpha_i + 1)]^(1 - eps_i), (xy)^(2 eps) and
    ((1 - zeta^2) / (2 zeta))^(d + |alpha| + 2|eps|); valid for every alpha > -1.
    """
    alpha = as_alpha(alpha)
    d = alpha.size
    x = as_point(x, d)
    y = as_point(y, d)
    zeta = zeta_of_t(t).zeta
    ls = float(log_sinh_2t(t))
    log_xy = np.log(x * y)
    terms = []
    for eps in itertools.product((0, 1), repeat=d):
        eps = np.asarray(eps)
        rule = _pi_product_rule(tuple(float(o) for o in alpha + 1.0 + eps), n_nodes, graded)
        s, log_w = rule.log_tensor()
        q = q_forms(x, y, s)
        exponent = -q.q_plus / (4.0 * zeta) - zeta * q.q_minus / 4.0 + log_w
        log_c = float(np.sum((1 - eps) * np.log(2.0 * (alpha + 1.0))))
        power = d + alpha.sum() + 2 * eps.sum()
        terms.append(
            log_c - power * ls + 2.0 * float(eps @ log_xy) + special.logsumexp(exponent)
        )
    return float(np.exp(special.logsumexp(terms)))


def heat_kernel_schlafli_symmetric(
    alpha: AlphaLike,
    t: float,
    x: PointLike,
    y: PointLike,
    n_nodes: int = settings.PI_NODES,
    graded: bool = False,
) -> float:
    """((1 - zeta^2) / (2 zeta))^(d + |alpha|) times the Pi_alpha integral of Exp; alpha >= -1/2."""
    alpha = as_alpha(alpha)
    if np.any(alpha < -0.5):
        raise DomainError(
            f"single-term representation needs alpha in [-1/2, inf)^d, got {alpha.tolist()}"
        )
    x = as_point(x, alpha.size)
    y = as_point(y, alpha.size)
    zeta = zeta_of_t(t).zeta
    rule = _pi_product_rule(tuple(float(a) for a in alpha), n_nodes, graded)
    s, log_w = rule.log_tensor()
    q = q_forms(x, y, s)
    exponent = -q.q_plus / (4.0 * zeta) - zeta * q.q_minus / 4.0 + log_w
    power = alpha.size + alpha.sum()
    return float(np.exp(-power * float(log_sinh_2t(t)) + special.logsumexp(exponent)))


# -- derivatives --------------------------------------------------------------------------


def _log_dt(alpha: np.ndarray, c: _ClosedForm, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d/dt log G_t."""
    zeta = c.zeta
    coth = (1.0 + zeta * zeta) / (2.0 * zeta)
    sech2 = 2.0 * zeta * c.csch
    ratio = np.asarray(bessel_ratio(alpha, c.z, c.log_z))
    d_gauss = -((x - y) ** 2) / (4.0 * zeta * zeta) + (x + y) ** 2 / 4.0
    per = -sech2 * d_gauss - 2.0 * coth * (c.z * (ratio - 1.0) + alpha)
    return -2.0 * alpha.size * coth[..., 0] + np.sum(per, axis=-1)


def _log_delta(alpha: np.ndarray, c: _ClosedForm, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(d/dx_j + x_j) G / G for every j, shape T + (d,).

    Written as y csch(2t) I_(a+1)/I_a - x (1 - zeta)^2 / (2 zeta), which has no
    cancellation for large t.
    """
    ratio = np.asarray(bessel_ratio(alpha, c.z, c.log_z))
    return y * c.csch * ratio - x * c.complement**2 / (2.0 * c.zeta)


def _time_step(t: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    gap2 = np.sum((x - y) ** 2, axis=-1)
    with np.errstate(divide="ignore"):
        scale = np.where(gap2 > 0.0, np.minimum(1.0, 4.0 * t / gap2), 1.0)
    return t * scale / 8.0


def _space_step(t: np.ndarray, xj: np.ndarray) -> np.ndarray:
    return np.minimum(xj, np.sqrt(np.tanh(t))) / 8.0


def _derivative(
    alpha: np.ndarray, t: Any, x: np.ndarray, y: np.ndarray, n: np.ndarray, m: int
) -> np.ndarray:
    order = int(n.sum())
    if m == 0 and order == 0:
        return np.exp(_closed_form(alpha, t, x, y).log_value)
    if m + order == 1:
        c = _closed_form(alpha, t, x, y)
        value = np.exp(c.log_value)
        if m == 1:
            return value * _log_dt(alpha, c, x, y)
        return value * _log_delta(alpha, c, x, y)[..., int(np.argmax(n))]
    if m > 0:
        t_arr = _check_t(t)

        def in_time(s: np.ndarray) -> np.ndarray:
            return _derivative(alpha, s, x, y, n, m - 1)

        return richardson_derivative(
            in_time, t_arr, _time_step(t_arr, x, y), levels=_RICHARDSON_LEVELS
        )
    j = int(np.flatnonzero(n)[0])
    rest = n.copy()
    rest[j] -= 1
    xj = x[..., j]

    def along(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        shape = np.broadcast_shapes(v.shape, x.shape[:-1])
        shifted = np.broadcast_to(x, shape + (x.shape[-1],)).copy()
        shifted[..., j] = v
        return _derivative(alpha, t, shifted, y, rest, 0)

    step = _space_step(_check_t(t), xj)
    slope = richardson_derivative(along, xj, step, levels=_RICHARDSON_LEVELS)
    return slope + xj * _derivative(alpha, t, x, y, rest, 0)


def kernel_derivative(
    alpha: AlphaLike, t: Any, x: Any, y: Any, n: IndexLike | None = None, m: int = 0
) -> float | np.ndarray:
    """d_t^m delta_x^n G_t(x, y) for |n| + 2m <= 4.

    First-order cases are analytic (chain rule on the closed form with the Bessel
    ratio); higher orders apply Richardson differences to lower-order ones.
    """
    alpha, x, y = _points(alpha, x, y)
    n = np.zeros(alpha.size, dtype=int) if n is None else as_multi_index(n, alpha.size)
    m = int(m)
    if m < 0:
        raise DomainError(f"time derivative order must be nonnegative, got {m}")
    if int(n.sum()) + 2 * m > MAX_DERIVATIVE_ORDER:
        raise DomainError(
            f"derivative order |n| + 2m = {int(n.sum()) + 2 * m} exceeds {MAX_DERIVATIVE_ORDER}"
        )
    return _as_output(_derivative(alpha, t, x, y, n, m))


# -- Poisson kernel -----------------------------------------------------------------------


def _subordinate(profile, t: float, abs_tol: float, rel_tol: float) -> float:
    """(2 / sqrt(pi)) * integral over w of profile(t^2 / (4 w^2)) e^{-w^2}."""

    def integrand(w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        positive = w > 0.0
        wp = w[positive]
        out[positive] = np.asarray(profile(t * t / (4.0 * wp * wp))) * np.exp(-wp * wp)
        return out

    value, _ = adaptive_quad(integrand, 0.0, _SUBORDINATION_W_MAX, abs_tol, rel_tol=rel_tol)
    return 2.0 / math.sqrt(math.pi) * float(value)


def poisson_kernel(
    alpha: AlphaLike, t: float, x: PointLike, y: PointLike, tol: float = 1e-10
) -> float:
    """P_t(x, y) by subordination of the closed-form heat kernel."""
    alpha = as_alpha(alpha)
    x = as_point(x, alpha.size)
    y = as_point(y, alpha.size)
    t = float(_check_t(t))
    return _subordinate(
        lambda tau: np.exp(_closed_form(alpha, tau, x, y).log_value), t, 1e-300, tol
    )


def poisson_kernel_derivative(
    alpha: AlphaLike,
    t: float,
    x: PointLike,
    y: PointLike,
    n: IndexLike | None = None,
    m: int = 0,
    tol: float = 1e-10,
) -> float:
    """d_t^m delta_x^n P_t(x, y) for m + |n| <= 1, subordinating analytic heat derivatives.

    With tau = t^2 / (4 w^2), d tau / d t = 2 tau / t.
    """
    alpha = as_alpha(alpha)
    n = np.zeros(alpha.size, dtype=int) if n is None else as_multi_index(n, alpha.size)
    if int(n.sum()) + int(m) > 1 or m < 0:
        raise DomainError(f"Poisson derivatives need m + |n| <= 1, got n={n.tolist()}, m={m}")
    x = as_point(x, alpha.size)
    y = as_point(y, alpha.size)
    t = float(_check_t(t))
    if int(n.sum()) + int(m) == 0:
        return poisson_kernel(alpha, t, x, y, tol)
    scale = abs(poisson_kernel(alpha, t, x, y, tol)) * tol or 1e-300
    if m == 1:

        def profile(tau: np.ndarray) -> np.ndarray:
            return 2.0 * tau / t * _derivative(alpha, tau, x, y, n, 1)

    else:

        def profile(tau: np.ndarray) -> np.ndarray:
            return _derivative(alpha, tau, x, y, n, 0)

    return _subordinate(profile, t, scale, tol)


# -- sampled pointwise inequalities -------------------------------------------------------


_LEMMA27_EDGE_SHARE = 0.25


def envelope_bound(b: float, c: float) -> float:
    """2^b (2b / (c e))^(b/2): sup of the zeta^(+-b/2)-weighted envelope ratios."""
    if b == 0.0:
        return 1.0
    return 2.0**b * (2.0 * b / (c * math.e)) ** (b / 2.0)


def _log_uniform(rng: np.random.Generator, lo: float, hi: float, size: Any) -> np.ndarray:
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def _lemma27_draw(
    rng: np.random.Generator, dim: int, n: int, b: float, c: float
) -> dict[str, tuple[int, float]]:
    """Violations and sup of each item on n samples of (x, y, s, zeta, A)."""
    zeta = _log_uniform(rng, 1e-4, 1.0, n)
    x = _log_uniform(rng, 1e-2, 10.0, (n, dim))
    y = _log_uniform(rng, 1e-2, 10.0, (n, dim))
    s = rng.uniform(-1.0, 1.0, (n, dim))
    # items c and d peak on y = x with s_j = +-1, so a share of the samples sits there
    edge = rng.random(n) < _LEMMA27_EDGE_SHARE
    y[edge] = x[edge]
    s[edge] = rng.choice((-1.0, 1.0), size=(int(edge.sum()), dim))
    A = _log_uniform(rng, 1e-6, 1e6, n)
    q = q_forms(x, y, s)
    pp = psi_phi(x, y, s)
    roots = {"+": np.sqrt(q.q_plus)[:, None], "-": np.sqrt(q.q_minus)[:, None]}
    slack = 1.0 + 1e-12

    a_violations, a_sup = 0, 0.0
    for sign, psi, phi in (("+", pp.psi_plus, pp.phi_plus), ("-", pp.psi_minus, pp.phi_minus)):
        root = roots[sign]
        a_violations += int(np.sum(np.abs(psi) > root * slack + 1e-300))
        a_violations += int(np.sum(np.abs(phi) > root * slack + 1e-300))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.maximum(np.abs(psi), np.abs(phi)) / root
        a_sup = max(a_sup, float(np.nanmax(ratios)))

    bound = (b / (c * math.e)) ** b if b > 0 else 1.0
    b_sup = 0.0
    b_violations = 0
    for qq in (q.q_plus, q.q_minus):
        value = (A * qq) ** b * np.exp(-c * A * qq)
        b_violations += int(np.sum(value > bound * slack))
        b_sup = max(b_sup, float(value.max()))

    envelope = exp_form(zeta, q.q_plus, q.q_minus) ** c
    half = np.sqrt(zeta) ** b
    plus = (np.abs(pp.psi_plus) + np.abs(pp.phi_plus)) ** b
    minus = (np.abs(pp.psi_minus) + np.abs(pp.phi_minus)) ** b
    return {
        "a": (a_violations, a_sup),
        "b": (b_violations, b_sup),
        "c": (0, float(np.max(plus * envelope[:, None] / half[:, None]))),
        "d": (0, float(np.max(minus * envelope[:, None] * half[:, None]))),
        "e": (0, float(np.max(x**b * envelope[:, None] * half[:, None]))),
    }


def lemma27_sample(
    alpha: AlphaLike, samples: int = 10**5, seed: int = 0, b: float = 1.0, c: float = 1.0
) -> dict[str, SampleReport]:
    """Sampled pointwise bounds for Psi, Phi, q and Exp(zeta, q).

    Items a and b have exact bounds (1 and (b / (c e))^b); items c to e are
    ratios against zeta^(+-b/2) whose sups must be stable under 10x samples.
    """
    if b < 0.0 or not c > 0.0:
        raise DomainError(f"need b >= 0 and c > 0, got b={b}, c={c}")
    dim = as_alpha(alpha).size
    rng = np.random.default_rng(seed)
    base = _lemma27_draw(rng, dim, samples, b, c)
    refined = _lemma27_draw(rng, dim, 10 * samples, b, c)
    expected = {"a": 1.0, "b": (b / (c * math.e)) ** b if b > 0 else 1.0}
    reports = {}
    for item in "abcde":
        violations, sup = base[item]
        refined_violations, refined_sup = refined[item]
        details: dict[str, Any] = {"dim": dim, "b": b, "c": c}
        if item in "cd":
            details["envelope_bound"] = envelope_bound(b, c)
        reports[item] = SampleReport(
            name=f"pointwise_bound_{item}",
            samples=samples,
            seed=seed,
            violations=violations + refined_violations,
            sup=sup,
            sup_refined=max(sup, refined_sup),
            expected=expected.get(item),
            details=details,
        )
    return reports


def _lemma210_draw(rng: np.random.Generator, dim: int, n: int) -> tuple[int, float]:
    violations, worst = 0, 0.0
    x, y, z = random_triples(rng, dim, n)
    s = rng.uniform(-1.0, 1.0, (n, dim))
    # x moved to z with |x - z| < |x - y| / 2, then y moved with the roles swapped
    pairs = ((q_forms(x, y, s), q_forms(z, y, s)), (q_forms(y, x, s), q_forms(y, z, s)))
    for base, moved in pairs:
        for a, b in ((base.q_plus, moved.q_plus), (base.q_minus, moved.q_minus)):
            ratio = b / a
            outside = (ratio < 0.25 / (1.0 + 1e-12)) | (ratio > 4.0 * (1.0 + 1e-12))
            violations += int(np.sum(outside))
            worst = max(worst, float(ratio.max()), float((1.0 / ratio).max()))
    return violations, worst


def lemma210_sample(dim: int, samples: int = 10**5, seed: int = 0) -> SampleReport:
    """q_(+-) comparability when one argument moves by less than half of |x - y|."""
    if dim < 1:
        raise DomainError(f"dimension must be positive, got {dim}")
    rng = np.random.default_rng(seed)
    violations, sup = _lemma210_draw(rng, dim, samples)
    refined_violations, refined_sup = _lemma210_draw(rng, dim, 10 * samples)
    return SampleReport(
        name="q_form_comparability",
        samples=samples,
        seed=seed,
        violations=violations + refined_violations,
        sup=sup,
        sup_refined=max(sup, refined_sup),
        expected=4.0,
        details={"dim": dim},
    )
