"""
Number-theoretic helpers shared by the lattice criteria and the bounds.

Covers the random modulus pool of prime point counts, the Riemann zeta
function, even-degree Bernoulli polynomials and the one-dimensional Korobov
kernel weight omega_alpha.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, isqrt, pi
from typing import Tuple
import logging

import numpy as np

logger = logging.getLogger(__name__)

ZETA_DOMAIN_EPS = 1e-9
SERIES_TAIL_TOL = 1e-10
# Hard cap on cosine-series terms for non-integer smoothness.
MAX_SERIES_TERMS = 2_000_000
SUPPORTED_BERNOULLI_DEGREES = (2, 4, 6, 8)

# Euler-Maclaurin cut-off and the Bernoulli numbers B_2 .. B_14 it uses.
_ZETA_DIRECT_TERMS = 32
_BERNOULLI_NUMBERS = (
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6),
)


@dataclass(frozen=True)
class PrimeRange:
    """Primes N with ceil(M/2) < N <= M, ascending."""
    M: int
    primes: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def __contains__(self, n) -> bool:
        return n in self.primes

    @property
    def lower(self) -> int:
        """Exclusive lower end ceil(M/2)."""
        return -(-self.M // 2)


@dataclass(frozen=True)
class BernoulliPoly:
    """Exact Bernoulli polynomial B_degree; coefficients in ascending powers."""
    degree: int
    coefficients: Tuple[Fraction, ...]

    def __call__(self, x: float) -> float:
        y = 0.0
        for c in reversed(self.coefficients):
            y = y * x + float(c)
        return y

    def exact(self, x: Fraction) -> Fraction:
        y = Fraction(0)
        for c in reversed(self.coefficients):
            y = y * x + c
        return y

    def integral(self) -> Fraction:
        """Exact integral over [0, 1]."""
        return sum((c / (i + 1) for i, c in enumerate(self.coefficients)), Fraction(0))


def _prime_flags_upto(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return flags


def primes_in_half_open_range(M: int, segment: int = 1 << 18) -> PrimeRange:
    """
    Enumerate the prime pool (ceil(M/2), M] with a segmented sieve.

    Args:
        M: upper end of the range, at least 2
        segment: sieve window length

    Returns:
        PrimeRange, possibly empty (callers decide whether to reject)
    """
    if M < 2:
        raise ValueError(f"M must be >= 2, got {M}")
    lo = -(-M // 2) + 1
    base = np.nonzero(_prime_flags_upto(isqrt(M)))[0]
    found = []
    for start in range(lo, M + 1, segment):
        stop = min(start + segment, M + 1)
        window = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            first = max(p * p, ((start + p - 1) // p) * p)
            window[first - start::p] = False
        if start <= 1:
            window[:2 - start] = False
        found.extend(int(v) + start for v in np.nonzero(window)[0])
    return PrimeRange(M=M, primes=tuple(found))


def prime_count_in_range(M: int) -> int:
    """|P_M|."""
    return len(primes_in_half_open_range(M))


def riemann_zeta(x: float) -> float:
    """
    Riemann zeta for real x > 1 via a short direct sum plus an
    Euler-Maclaurin tail; relative error well below 1e-12.
    """
    if not x > 1.0 + ZETA_DOMAIN_EPS:
        raise ValueError(f"riemann_zeta is defined here only for x > 1 + {ZETA_DOMAIN_EPS}, got {x}")
    K = _ZETA_DIRECT_TERMS
    k = np.arange(1, K, dtype=np.float64)
    head = float(np.sum(k ** (-x)))
    tail = K ** (1.0 - x) / (x - 1.0) + 0.5 * K ** (-x)
    rising = x  # x (x+1) ... (x+2j-2)
    for j, b2j in enumerate(_BERNOULLI_NUMBERS, start=1):
        tail += float(b2j) / factorial(2 * j) * rising * K ** (-x - 2 * j + 1)
        rising *= (x + 2 * j - 1) * (x + 2 * j)
    return head + tail


@lru_cache(maxsize=None)
def bernoulli_coefficients(two_alpha: int) -> Tuple[Fraction, ...]:
    """Exact coefficients of B_n (ascending powers) from B_n(x) = sum C(n,k) B_k x^(n-k)."""
    if two_alpha not in SUPPORTED_BERNOULLI_DEGREES:
        raise ValueError(f"unsupported Bernoulli degree {two_alpha}; supported: {SUPPORTED_BERNOULLI_DEGREES}")
    n = two_alpha
    numbers = {0: Fraction(1), 1: Fraction(-1, 2)}
    for j, b2j in enumerate(_BERNOULLI_NUMBERS, start=1):
        numbers[2 * j] = b2j
    coeffs = [Fraction(0)] * (n + 1)
    for k in range(n + 1):
        coeffs[n - k] = comb(n, k) * numbers.get(k, Fraction(0))
    return tuple(coeffs)


def bernoulli_poly(two_alpha: int) -> BernoulliPoly:
    return BernoulliPoly(degree=two_alpha, coefficients=bernoulli_coefficients(two_alpha))


def bernoulli_value(two_alpha: int, x):
    """Evaluate B_{2alpha}(x) for x in [0, 1]; accepts scalars or numpy arrays."""
    coeffs = bernoulli_coefficients(two_alpha)
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("bernoulli_value expects x in [0, 1]")
    y = np.zeros_like(x)
    for c in reversed(coeffs):
        y = y * x + float(c)
    return float(y) if y.ndim == 0 else y


def _is_closed_form(alpha: float) -> bool:
    return float(alpha).is_integer() and 2 * int(alpha) in SUPPORTED_BERNOULLI_DEGREES


def _cosine_series(alpha: float, t: np.ndarray, terms: int) -> np.ndarray:
    out = np.zeros_like(t, dtype=np.float64)
    chunk = max(1, (1 << 22) // max(t.size, 1))
    for start in range(1, terms + 1, chunk):
        k = np.arange(start, min(start + chunk, terms + 1), dtype=np.float64)
        out += np.cos(2.0 * pi * np.multiply.outer(t, k)) @ (k ** (-2.0 * alpha))
    return 2.0 * out


def series_terms_for(alpha: float, tol: float = SERIES_TAIL_TOL) -> int:
    """Terms K with integral-test tail 2 K^(1-2a)/(2a-1) <= tol, capped at MAX_SERIES_TERMS."""
    a2 = 2.0 * alpha
    K = int(np.ceil((tol * (a2 - 1.0) / 2.0) ** (1.0 / (1.0 - a2))))
    if K > MAX_SERIES_TERMS:
        achieved = 2.0 * MAX_SERIES_TERMS ** (1.0 - a2) / (a2 - 1.0)
        logger.warning(f"omega series for alpha={alpha} capped at {MAX_SERIES_TERMS} terms; tail bound {achieved:.3e}")
        return MAX_SERIES_TERMS
    return max(K, 1)


@lru_cache(maxsize=None)
def _closed_form_scale(alpha: int) -> float:
    """(-1)^(a+1) (2 pi)^(2a) / (2a)!, checked once against the raw cosine series."""
    scale = (-1) ** (alpha + 1) * (2.0 * pi) ** (2 * alpha) / factorial(2 * alpha)
    t = np.array([1.0 / 3.0, 0.1])
    closed = scale * bernoulli_value(2 * alpha, t)
    raw = _cosine_series(float(alpha), t, 20_000)
    if np.max(np.abs(closed - raw)) > 1e-6:
        raise RuntimeError(f"Bernoulli closed form disagrees with cosine series for alpha={alpha}")
    return scale


def korobov_kernel_weight(alpha: float, t):
    """
    omega_alpha(t) = sum over k != 0 of exp(2 pi i k t) / |k|^(2 alpha).

    Integer alpha in {1,2,3,4} uses the Bernoulli closed form, anything else
    a truncated cosine series with tail at most SERIES_TAIL_TOL.
    """
    if not alpha > 0.5:
        raise ValueError(f"alpha must be > 1/2, got {alpha}")
    t = np.asarray(t, dtype=np.float64)
    if _is_closed_form(alpha):
        a = int(alpha)
        y = _closed_form_scale(a) * bernoulli_value(2 * a, t)
    else:
        y = _cosine_series(alpha, np.atleast_1d(t), series_terms_for(alpha))
        y = y.reshape(t.shape)
    return float(y) if np.ndim(y) == 0 else y


def kernel_weight_table(alpha: float, N: int) -> np.ndarray:
    """omega_alpha(n/N) for n = 0..N-1, built symmetric so table[N-n] == table[n]."""
    half = np.arange(0, N // 2 + 1, dtype=np.float64) / N
    values = np.atleast_1d(korobov_kernel_weight(alpha, half))
    table = np.empty(N, dtype=np.float64)
    table[:N // 2 + 1] = values
    table[N // 2 + 1:] = values[1:(N + 1) // 2][::-1]
    return table
