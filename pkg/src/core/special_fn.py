"""Modified Bessel functions, Laguerre polynomials and functions, Faa di Bruno."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from functools import lru_cache

import numpy as np
from scipy import special

from src.core.exceptions import DomainError
from src.core.models import AlphaLike, IndexLike, as_alpha, as_multi_index, as_points

# Below this the scaled Bessel value is subnormal and the leading series term is used.
_LOG_UNDERFLOW = 1e-290
_SMALL_ARGUMENT = 1e-100
# scipy's ive goes NaN near z = 1e10; past this the Hankel expansion is used instead.
_LARGE_ARGUMENT = 1e8
_HANKEL_TERMS = 4


def _scalar_or_array(value: np.ndarray) -> float | np.ndarray:
    return float(value) if np.ndim(value) == 0 else value


def _check_order(nu: np.ndarray) -> None:
    if np.any(~np.isfinite(nu) | (nu <= -1.0)):
        raise DomainError(f"Bessel order must exceed -1, got {nu}")


def _log_hankel(nu: np.ndarray, log_z: np.ndarray) -> np.ndarray:
    """Large-argument expansion of log(exp(-z) I_nu(z)).

    exp(-z) I_nu(z) ~ (2 pi z)^(-1/2) sum_k (-1)^k a_k(nu) z^(-k) with
    a_k = prod_{j <= k} (4 nu^2 - (2j - 1)^2) / (k! 8^k).
    """
    inv = np.exp(-log_z)
    mu = 4.0 * nu**2
    term = np.ones(np.broadcast(nu, log_z).shape)
    total = np.zeros_like(term)
    for k in range(1, _HANKEL_TERMS + 1):
        term = -term * (mu - (2 * k - 1) ** 2) * inv / (8.0 * k)
        total = total + term
    return -0.5 * (math.log(2.0 * math.pi) + log_z) + np.log1p(total)


def bessel_i_scaled(nu: float | np.ndarray, z: float | np.ndarray) -> float | np.ndarray:
    """Return exp(-z) * I_nu(z) for nu > -1 and z >= 0."""
    nu_arr = np.asarray(nu, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    _check_order(nu_arr)
    if np.any(~np.isfinite(z_arr) | (z_arr < 0.0)):
        raise DomainError(f"Bessel argument must be finite and nonnegative, got {z}")
    large = z_arr > _LARGE_ARGUMENT
    if not np.any(large):
        return _scalar_or_array(special.ive(nu_arr, z_arr))
    value = special.ive(nu_arr, np.where(large, 1.0, z_arr))
    asymptotic = np.exp(_log_hankel(nu_arr, np.log(np.where(large, z_arr, 1.0))))
    return _scalar_or_array(np.where(large, asymptotic, value))


def log_bessel_i_scaled(
    nu: float | np.ndarray, z: float | np.ndarray, log_z: float | np.ndarray | None = None
) -> float | np.ndarray:
    """log(exp(-z) I_nu(z)), finite wherever the scaled value under- or overflows.

    log_z, when given, feeds the small- and large-argument expansions, so an argument
    that underflowed to zero or overflowed to inf still yields a finite result.
    """
    nu_arr = np.asarray(nu, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    _check_order(nu_arr)
    if np.any(np.isnan(z_arr) | (z_arr < 0.0)):
        raise DomainError(f"Bessel argument must be nonnegative, got {z}")
    large = z_arr > _LARGE_ARGUMENT
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lz = np.log(z_arr) if log_z is None else np.asarray(log_z, dtype=float)
        value = special.ive(nu_arr, np.where(large, 1.0, z_arr))
        out = np.log(value)
        series = nu_arr * (lz - math.log(2.0)) - special.gammaln(nu_arr + 1.0) - z_arr
        hankel = _log_hankel(nu_arr, np.where(large, lz, math.log(_LARGE_ARGUMENT)))
    small = ~large & ((value < _LOG_UNDERFLOW) | (z_arr < _SMALL_ARGUMENT))
    out = np.where(small, series, out)
    out = np.where(large, hankel, out)
    return _scalar_or_array(out)


def bessel_ratio(
    nu: float | np.ndarray, z: float | np.ndarray, log_z: float | np.ndarray | None = None
) -> float | np.ndarray:
    """I_{nu+1}(z) / I_nu(z) for z > 0."""
    nu_arr = np.asarray(nu, dtype=float)
    return _scalar_or_array(
        np.exp(
            np.asarray(log_bessel_i_scaled(nu_arr + 1.0, z, log_z))
            - np.asarray(log_bessel_i_scaled(nu_arr, z, log_z))
        )
    )


def laguerre_table(k_max: int, a: float, u: float | np.ndarray) -> np.ndarray:
    """L_j^a(u) for j = 0..k_max stacked along the first axis.

    Uses the forward recurrence
    (j+1) L_{j+1} = (2j + 1 + a - u) L_j - (j + a) L_{j-1}.
    """
    if k_max < 0:
        raise DomainError(f"Laguerre degree must be nonnegative, got {k_max}")
    if not a > -1.0:
        raise DomainError(f"Laguerre parameter must exceed -1, got {a}")
    u = np.asarray(u, dtype=float)
    table = np.empty((k_max + 1,) + u.shape)
    table[0] = 1.0
    if k_max >= 1:
        table[1] = 1.0 + a - u
    for j in range(1, k_max):
        table[j + 1] = ((2 * j + 1 + a - u) * table[j] - (j + a) * table[j - 1]) / (j + 1)
    return table


def laguerre_poly(k: int, a: float, u: float | np.ndarray) -> float | np.ndarray:
    """Generalized Laguerre polynomial L_k^a(u)."""
    return _scalar_or_array(laguerre_table(int(k), a, u)[int(k)])


def laguerre_norm(k: int | np.ndarray, a: float) -> float | np.ndarray:
    """c_k^a = (2 k! / Gamma(k + a + 1))^(1/2)."""
    k_arr = np.asarray(k, dtype=float)
    log_c = 0.5 * (math.log(2.0) + special.gammaln(k_arr + 1.0) - special.gammaln(k_arr + a + 1.0))
    return _scalar_or_array(np.exp(log_c))


def laguerre_fn_table(k_max: int, a: float, x: float | np.ndarray) -> np.ndarray:
    """One-dimensional l_j^a(x) for j = 0..k_max stacked along the first axis."""
    x = np.asarray(x, dtype=float)
    u = x * x
    norms = np.asarray(laguerre_norm(np.arange(k_max + 1), a))
    norms = norms.reshape((k_max + 1,) + (1,) * x.ndim)
    return norms * laguerre_table(k_max, a, u) * np.exp(-u / 2.0)


@lru_cache(maxsize=32)
def _delta_terms(n: int) -> tuple[tuple[int, int, float], ...]:
    """delta^n of L_k^a(x^2) e^{-x^2/2} as sum of coef * x^p * L_{k-j}^{a+j}(x^2) e^{-x^2/2}.

    delta (P e^{-x^2/2}) = P' e^{-x^2/2} and d/dx L_m^b(x^2) = -2x L_{m-1}^{b+1}(x^2),
    so each step maps (p, j) to p (p-1, j) and -2 (p+1, j+1).
    """
    terms: dict[tuple[int, int], float] = {(0, 0): 1.0}
    for _ in range(n):
        nxt: dict[tuple[int, int], float] = {}
        for (p, j), coef in terms.items():
            if p > 0:
                nxt[(p - 1, j)] = nxt.get((p - 1, j), 0.0) + p * coef
            nxt[(p + 1, j + 1)] = nxt.get((p + 1, j + 1), 0.0) - 2.0 * coef
        terms = {key: c for key, c in nxt.items() if c != 0.0}
    return tuple((p, j, c) for (p, j), c in sorted(terms.items()))


def delta_laguerre_table(k_max: int, a: float, x: float | np.ndarray, n: int) -> np.ndarray:
    """One-dimensional delta^n l_j^a(x) for j = 0..k_max."""
    if n < 0:
        raise DomainError(f"derivative order must be nonnegative, got {n}")
    if n == 0:
        return laguerre_fn_table(k_max, a, x)
    x = np.asarray(x, dtype=float)
    u = x * x
    out = np.zeros((k_max + 1,) + x.shape)
    for p, j, coef in _delta_terms(n):
        if j > k_max:
            continue
        out[j:] += coef * x**p * laguerre_table(k_max - j, a + j, u)
    norms = np.asarray(laguerre_norm(np.arange(k_max + 1), a))
    norms = norms.reshape((k_max + 1,) + (1,) * x.ndim)
    return out * norms * np.exp(-u / 2.0)


def laguerre_fn(
    k: IndexLike, alpha: AlphaLike, x: Sequence[float] | np.ndarray
) -> float | np.ndarray:
    """l_k^alpha(x); x may carry leading batch axes with trailing length d."""
    return delta_laguerre_fn(k, alpha, x, np.zeros(as_alpha(alpha).size, dtype=int))


def delta_laguerre_fn(
    k: IndexLike, alpha: AlphaLike, x: Sequence[float] | np.ndarray, n: IndexLike
) -> float | np.ndarray:
    """delta^n l_k^alpha(x), coordinate by coordinate."""
    alpha = as_alpha(alpha)
    d = alpha.size
    k = as_multi_index(k, d)
    n = as_multi_index(n, d)
    x = as_points(x, d)
    value = np.ones(x.shape[:-1])
    for i in range(d):
        value = value * delta_laguerre_table(int(k[i]), alpha[i], x[..., i], int(n[i]))[k[i]]
    return _scalar_or_array(value)


def apply_laguerre_operator(
    f: Callable[[np.ndarray], float], alpha: AlphaLike, x: Sequence[float], h: float = 1e-3
) -> float:
    """Second-order central differences of -Delta f + |x|^2 f - sum (2 alpha_i + 1)/x_i d_i f."""
    alpha = as_alpha(alpha)
    x = as_points(x, alpha.size)
    centre = f(x)
    value = float(np.dot(x, x)) * centre
    for i in range(alpha.size):
        step = np.zeros_like(x)
        step[i] = h
        plus, minus = f(x + step), f(x - step)
        value -= (plus - 2.0 * centre + minus) / h**2
        value -= (2.0 * alpha[i] + 1.0) / x[i] * (plus - minus) / (2.0 * h)
    return float(value)


def _integer_partitions(n: int, largest: int):
    if n == 0:
        yield ()
        return
    for part in range(min(n, largest), 0, -1):
        for rest in _integer_partitions(n - part, part):
            yield (part,) + rest


def faa_partitions(N: int) -> set[tuple[int, ...]]:
    """All (p_1, ..., p_N) >= 0 with p_1 + 2 p_2 + ... + N p_N = N."""
    if N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    return {
        tuple(parts.count(i) for i in range(1, N + 1)) for parts in _integer_partitions(N, N)
    }


def partition_count(N: int) -> int:
    """p(N) by Euler's pentagonal-number recurrence."""
    counts = [1] + [0] * N
    for m in range(1, N + 1):
        total, j = 0, 1
        while True:
            g1 = j * (3 * j - 1) // 2
            if g1 > m:
                break
            sign = 1 if j % 2 else -1
            total += sign * counts[m - g1]
            g2 = j * (3 * j + 1) // 2
            if g2 <= m:
                total += sign * counts[m - g2]
            j += 1
        counts[m] = total
    return counts[N]


def compose_derivative(g_derivs: Sequence[float], f_derivs: Sequence[float], N: int) -> float:
    """N-th derivative of g(f(x)) from g^(j)(f(x)), j = 0..N, and f^(j)(x), j = 1..N."""
    if N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    if len(g_derivs) < N + 1:
        raise DomainError(f"need {N + 1} derivatives of g, got {len(g_derivs)}")
    if len(f_derivs) < N:
        raise DomainError(f"need {N} derivatives of f, got {len(f_derivs)}")
    total = 0.0
    for p in faa_partitions(N):
        denominator = 1
        term = g_derivs[sum(p)]
        for i, p_i in enumerate(p, start=1):
            denominator *= math.factorial(p_i) * math.factorial(i) ** p_i
            term *= f_derivs[i - 1] ** p_i
        total += math.factorial(N) / denominator * term
    return float(total)
