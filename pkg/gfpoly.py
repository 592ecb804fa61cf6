"""
Polynomials over the prime field F_b.

A polynomial c_0 + c_1 x + ... + c_n x^n is held as the tuple
(c_0, c_1, ..., c_n) with c_n != 0; the zero polynomial is the empty tuple.
The b-adic digit map k = k_0 + k_1 b + ... <-> k(x) = k_0 + k_1 x + ...
identifies polynomials with non-negative integers and gives the canonical
(ascending, lexicographic) order used for enumeration and tie-breaking.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from math import inf, isqrt
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np

logger = logging.getLogger(__name__)

# Exhaustive divisor test up to this degree, gcd criterion beyond.
EXHAUSTIVE_IRREDUCIBILITY_DEGREE = 8
# Trial-division bound when factoring b^m - 1 for the period computation.
TRIAL_DIVISION_LIMIT = 1_000_000


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


def _strip(coeffs) -> Tuple[int, ...]:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True, order=False)
class GFPoly:
    """Canonical dense polynomial over F_base."""
    base: int
    coeffs: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.base < 2:
            raise ValueError(f"base must be a prime >= 2, got {self.base}")
        c = _strip(int(a) % self.base for a in self.coeffs)
        object.__setattr__(self, 'coeffs', c)

    @classmethod
    def from_int(cls, k: int, base: int) -> 'GFPoly':
        if k < 0:
            raise ValueError("polynomial index must be non-negative")
        digits = []
        while k:
            k, r = divmod(k, base)
            digits.append(r)
        return cls(base, tuple(digits))

    @classmethod
    def monomial(cls, degree: int, base: int) -> 'GFPoly':
        return cls(base, (0,) * degree + (1,))

    def to_int(self) -> int:
        k = 0
        for c in reversed(self.coeffs):
            k = k * self.base + c
        return k

    @property
    def degree(self):
        """Degree; -inf for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else -inf

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def coefficient(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def padded(self, length: int) -> np.ndarray:
        """Coefficient vector of the given length (zero-padded)."""
        out = np.zeros(length, dtype=np.int64)
        out[:len(self.coeffs)] = self.coeffs[:length]
        return out

    def __str__(self) -> str:
        return format_poly(self)


def poly_from_int(k: int, b: int) -> GFPoly:
    """k = k_0 + k_1 b + ... -> k(x) = k_0 + k_1 x + ..."""
    return GFPoly.from_int(k, b)


def poly_to_int(poly: GFPoly) -> int:
    return poly.to_int()


def _check_base(*polys: GFPoly) -> int:
    b = polys[0].base
    for p in polys[1:]:
        if p.base != b:
            raise ValueError(f"base mismatch: {b} vs {p.base}")
    return b


def parse_poly(text: str, base: int) -> GFPoly:
    """Read the "c0,c1,..." form, e.g. "1,1,0,1" is 1 + x + x^3."""
    text = text.strip()
    if not text:
        return GFPoly(base)
    coeffs = [int(t) for t in text.split(',')]
    if any(c < 0 or c >= base for c in coeffs):
        raise ValueError(f"coefficients of {text!r} must lie in [0, {base})")
    return GFPoly(base, tuple(coeffs))


def format_poly(poly: GFPoly) -> str:
    return ','.join(str(c) for c in poly.coeffs)


def poly_add(a: GFPoly, c: GFPoly) -> GFPoly:
    b = _check_base(a, c)
    n = max(len(a.coeffs), len(c.coeffs))
    return GFPoly(b, tuple((a.coefficient(i) + c.coefficient(i)) % b for i in range(n)))


def poly_sub(a: GFPoly, c: GFPoly) -> GFPoly:
    b = _check_base(a, c)
    n = max(len(a.coeffs), len(c.coeffs))
    return GFPoly(b, tuple((a.coefficient(i) - c.coefficient(i)) % b for i in range(n)))


def poly_mul(a: GFPoly, c: GFPoly) -> GFPoly:
    b = _check_base(a, c)
    if a.is_zero or c.is_zero:
        return GFPoly(b)
    out = [0] * (len(a.coeffs) + len(c.coeffs) - 1)
    for i, ai in enumerate(a.coeffs):
        if ai:
            for j, cj in enumerate(c.coeffs):
                out[i + j] = (out[i + j] + ai * cj) % b
    return GFPoly(b, tuple(out))


def poly_divmod(a: GFPoly, p: GFPoly) -> Tuple[GFPoly, GFPoly]:
    b = _check_base(a, p)
    if p.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    r = list(a.coeffs)
    dp = len(p.coeffs) - 1
    inv_lc = pow(p.coeffs[-1], b - 2, b)
    q = [0] * max(len(r) - dp, 0)
    for i in range(len(r) - 1, dp - 1, -1):
        t = r[i] * inv_lc % b
        if t:
            q[i - dp] = t
            for j, pj in enumerate(p.coeffs):
                r[i - dp + j] = (r[i - dp + j] - t * pj) % b
    return GFPoly(b, tuple(q)), GFPoly(b, tuple(r[:dp]))


def poly_mod(a: GFPoly, p: GFPoly) -> GFPoly:
    return poly_divmod(a, p)[1]


def poly_mod_mul(a: GFPoly, c: GFPoly, p: GFPoly) -> GFPoly:
    """a * c mod p in canonical form."""
    _check_base(a, c, p)
    return poly_mod(poly_mul(a, c), p)


def poly_powmod(a: GFPoly, n: int, p: GFPoly) -> GFPoly:
    result = poly_mod(GFPoly(a.base, (1,)), p)
    a = poly_mod(a, p)
    while n:
        if n & 1:
            result = poly_mod_mul(result, a, p)
        a = poly_mod_mul(a, a, p)
        n >>= 1
    return result


def poly_gcd(a: GFPoly, c: GFPoly) -> GFPoly:
    """Monic gcd (zero if both are zero)."""
    b = _check_base(a, c)
    while not c.is_zero:
        a, c = c, poly_mod(a, c)
    if a.is_zero:
        return a
    inv = pow(a.coeffs[-1], b - 2, b)
    return GFPoly(b, tuple(x * inv % b for x in a.coeffs))


def _monic_of_degree(b: int, d: int):
    for low in range(b ** d):
        yield GFPoly.from_int(b ** d + low, b)


def is_irreducible(p: GFPoly) -> bool:
    """True iff p (degree >= 1) has no nontrivial factor over F_b."""
    if not p.coeffs or p.degree < 1:
        raise ValueError("irreducibility needs a polynomial of degree >= 1")
    b = p.base
    deg = p.degree
    if deg == 1:
        return True
    if deg <= EXHAUSTIVE_IRREDUCIBILITY_DEGREE:
        for d in range(1, deg // 2 + 1):
            for f in _monic_of_degree(b, d):
                if poly_mod(p, f).is_zero:
                    return False
        return True
    # gcd(x^(b^d) - x, p) == 1 for all d <= deg/2
    x = GFPoly(b, (0, 1))
    h = x
    for _ in range(deg // 2):
        h = poly_powmod(h, b, p)
        if poly_gcd(poly_sub(h, x), p).degree != 0:
            return False
    return True


@lru_cache(maxsize=None)
def _irreducibles(b: int, m: int) -> Tuple[GFPoly, ...]:
    found = tuple(f for f in _monic_of_degree(b, m) if is_irreducible(f))
    logger.info(f"Enumerated {len(found)} monic irreducibles over F_{b} of degree {m}")
    return found


def enumerate_monic_irreducibles(b: int, m: int) -> List[GFPoly]:
    """All monic irreducible polynomials of degree m, ascending."""
    if not _is_prime(b):
        raise ValueError(f"base must be prime, got {b}")
    if m < 1:
        raise ValueError(f"degree must be >= 1, got {m}")
    return list(_irreducibles(b, m))


def laurent_digits(residues: np.ndarray, p: GFPoly, count: int) -> np.ndarray:
    """
    Fractional Laurent digits u_1..u_count of v(x)/p(x) for many v at once.

    Args:
        residues: (n, m) coefficient rows of v with deg v < m = deg p
        p: modulus
        count: number of digits

    Returns:
        (n, count) integer digit array
    """
    b = p.base
    m = p.degree
    r = np.array(residues, dtype=np.int64, copy=True).reshape(-1, m)
    low = p.padded(m + 1)[:m]
    inv_lc = pow(p.coeffs[-1], b - 2, b)
    out = np.empty((r.shape[0], count), dtype=np.int64)
    for i in range(count):
        top = r[:, m - 1].copy()
        r[:, 1:] = r[:, :-1]
        r[:, 0] = 0
        u = top * inv_lc % b
        r = (r - u[:, None] * low[None, :]) % b
        out[:, i] = u
    return out


def laurent_expand(v: GFPoly, p: GFPoly, count: int) -> List[int]:
    """First `count` fractional Laurent digits of v(x)/p(x); the polynomial part is dropped."""
    _check_base(v, p)
    if p.is_zero:
        raise ValueError("modulus must be nonzero")
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if v.degree >= p.degree:
        raise ValueError(f"deg(v)={v.degree} must be < deg(p)={p.degree}")
    return [int(u) for u in laurent_digits(v.padded(p.degree)[None, :], p, count)[0]]


def _factor(n: int) -> Optional[List[int]]:
    """Distinct prime factors by trial division, or None when the cofactor stays unproven."""
    primes = []
    d = 2
    while d * d <= n and d <= TRIAL_DIVISION_LIMIT:
        if n % d == 0:
            primes.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        if d * d <= n:
            return None
        primes.append(n)
    return primes


@lru_cache(maxsize=None)
def _order_of_x(p: GFPoly) -> int:
    b, m = p.base, p.degree
    x = GFPoly(b, (0, 1))
    one = GFPoly(b, (1,))
    group = b ** m - 1
    primes = _factor(group)
    if primes is None:
        logger.warning(f"factorization of {b}^{m}-1 incomplete; scanning powers of x linearly")
        h = x
        for k in range(1, group + 1):
            if h == one:
                return k
            h = poly_mod_mul(h, x, p)
        raise ValueError("x has no finite order modulo p")
    order = group
    for q in primes:
        while order % q == 0 and poly_powmod(x, order // q, p) == one:
            order //= q
    return order


def _check_period_preconditions(p: GFPoly):
    if p.degree < 1 or p == GFPoly(p.base, (0, 1)) or not is_irreducible(p):
        raise ValueError("period needs an irreducible modulus p(x) != x")


def expansion_period(v: GFPoly, p: GFPoly) -> int:
    """Least k with u_(i+k) = u_i for all i; equals the order of x modulo p."""
    _check_base(v, p)
    _check_period_preconditions(p)
    if v.is_zero or v.degree >= p.degree:
        raise ValueError("period needs v != 0 with deg(v) < deg(p)")
    return _order_of_x(p)


@lru_cache(maxsize=None)
def period_block(p: GFPoly) -> Tuple[int, GFPoly]:
    """
    (k, h) with k the expansion period and h = (x^k - 1)/p.

    For deg v < deg p the first k digits of v/p are the coefficients of v*h
    read from the top, so phi_inf(v/p) = int(v*h) / (b^k - 1).
    """
    _check_period_preconditions(p)
    k = _order_of_x(p)
    b = p.base
    xk_minus_1 = poly_sub(GFPoly.monomial(k, b), GFPoly(b, (1,)))
    h, rem = poly_divmod(xk_minus_1, p)
    if not rem.is_zero:
        raise ValueError("p does not divide x^k - 1")
    return k, h


def residue_matrix(p: GFPoly, q: GFPoly) -> np.ndarray:
    """
    Coefficient rows of n(x) q(x) mod p(x) for n = 0 .. b^m - 1 (b-adic order).

    Multiplication by q is F_b-linear, so the rows are digits(n) @ W mod b
    with W[i] = x^i q mod p.
    """
    b = _check_base(p, q)
    m = p.degree
    W = np.zeros((m, m), dtype=np.int64)
    row = poly_mod(q, p)
    x = GFPoly(b, (0, 1))
    for i in range(m):
        W[i] = row.padded(m)
        row = poly_mod_mul(row, x, p)
    return (index_digits(b, m) @ W) % b


@lru_cache(maxsize=32)
def _index_digits(b: int, m: int) -> np.ndarray:
    n = np.arange(b ** m, dtype=np.int64)
    d = (n[:, None] // (b ** np.arange(m, dtype=np.int64))[None, :]) % b
    d.setflags(write=False)
    return d


def index_digits(b: int, m: int) -> np.ndarray:
    """(b^m, m) matrix of b-adic digits of n, i.e. the coefficients of n(x)."""
    return _index_digits(b, m)


@dataclass(frozen=True)
class FieldLogTables:
    """
    Discrete logarithms in F_b[x]/(p) for irreducible p.

    exp[i] is the integer code of g^i for a primitive element g and
    log[code] inverts it (log[0] is unused), so n(x) q(x) mod p has code
    exp[(log[n] + log[q]) % order].
    """
    p: GFPoly
    generator: GFPoly
    exp: np.ndarray
    log: np.ndarray

    @property
    def order(self) -> int:
        return self.exp.size


def _primitive_element(p: GFPoly, group: int) -> GFPoly:
    b = p.base
    one = GFPoly(b, (1,))
    primes = _factor(group)
    if primes is None:
        raise ValueError(f"cannot factor {group} to find a primitive element")
    for code in range(2 if p.degree > 1 else 1, b ** p.degree):
        g = GFPoly.from_int(code, b)
        if all(poly_powmod(g, group // q, p) != one for q in primes):
            return g
    raise ValueError("no primitive element found; is p irreducible?")


@lru_cache(maxsize=16)
def field_log_tables(p: GFPoly) -> FieldLogTables:
    """Build exp/log tables of the multiplicative group of F_b[x]/(p)."""
    if p.degree < 1 or not is_irreducible(p):
        raise ValueError("log tables need an irreducible modulus")
    b, m = p.base, p.degree
    group = b ** m - 1
    g = _primitive_element(p, group)
    # multiplication by g is linear: code(v * g) = digits(v) @ G mod b
    G = np.zeros((m, m), dtype=np.int64)
    row = g
    x = GFPoly(b, (0, 1))
    for i in range(m):
        G[i] = row.padded(m)
        row = poly_mod_mul(row, x, p)
    weights = b ** np.arange(m, dtype=np.int64)
    exp = np.empty(group, dtype=np.int64)
    v = GFPoly(b, (1,)).padded(m)
    for i in range(group):
        exp[i] = int(v @ weights)
        v = (v @ G) % b
    log = np.zeros(group + 1, dtype=np.int64)
    log[exp] = np.arange(group, dtype=np.int64)
    exp.setflags(write=False)
    log.setflags(write=False)
    return FieldLogTables(p=p, generator=g, exp=exp, log=log)


def code_degrees(b: int, m: int) -> np.ndarray:
    """deg of the polynomial with integer code c, for c = 0 .. b^m - 1 (-1 for zero)."""
    deg = np.full(b ** m, -1, dtype=np.int64)
    for d in range(m):
        deg[b ** d:b ** (d + 1)] = d
    return deg


@dataclass(frozen=True)
class PolyLatticeRule:
    """Rank-1 polynomial lattice rule: modulus p of degree m and generating vector q."""
    b: int
    m: int
    p: GFPoly
    q: Tuple[GFPoly, ...]

    def __post_init__(self):
        if self.p.base != self.b or self.p.degree != self.m:
            raise ValueError(f"modulus must have base {self.b} and degree {self.m}")
        for qj in self.q:
            if qj.base != self.b or qj.degree >= self.m:
                raise ValueError(f"generating polynomial {qj} must have base {self.b} and degree < {self.m}")

    @property
    def s(self) -> int:
        return len(self.q)

    @property
    def n_points(self) -> int:
        return self.b ** self.m


def dual_residue_codes(ks: Sequence[int], q: GFPoly, p: GFPoly) -> np.ndarray:
    """Integer codes of k(x) q(x) mod p(x) for each k (dual-lattice membership tests)."""
    return np.array([poly_mod_mul(GFPoly.from_int(int(k), p.base), q, p).to_int() for k in ks],
                    dtype=np.int64)


def digitwise_add(a: np.ndarray, c: np.ndarray, b: int, ndigits: int) -> np.ndarray:
    """Digitwise addition mod b of integer codes (the (+) operation on F_b[x] codes)."""
    a = np.asarray(a, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    out = np.zeros(np.broadcast(a, c).shape, dtype=np.int64)
    scale = 1
    for _ in range(ndigits):
        out += ((a // scale % b + c // scale % b) % b) * scale
        scale *= b
    return out
