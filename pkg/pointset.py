"""
Quadrature nodes: lattice points, random shift, tent transform, polynomial
lattice points at finite and infinite precision, and random digital shift.
"""
from dataclasses import dataclass, replace
from fractions import Fraction
from math import ceil, fsum, log2, sqrt
from typing import Callable, Optional, Tuple
import logging

import numpy as np

from cbc import RandomSource
from gfpoly import (
    GFPoly, PolyLatticeRule, expansion_period, is_irreducible, laurent_digits, laurent_expand,
    period_block, poly_mul, residue_matrix,
)
from korobov import LatticeRule, SpaceParams, ORACLE_MAX_DIMENSION

logger = logging.getLogger(__name__)

INFINITE = None
PLAIN, SHIFTED, TENTED, SHIFTED_TENTED, TENTED_SHIFTED, DIGITAL_SHIFTED = (
    'plain', 'shifted', 'tented', 'shifted+tented', 'tented+shifted', 'digital-shifted')


def default_digit_count(b: int) -> int:
    """Digits that saturate double precision: 53 for b = 2, ceil(53 / log2 b) otherwise."""
    return 53 if b == 2 else ceil(53 / log2(b))


def digits_to_float(digits: np.ndarray, b: int) -> np.ndarray:
    """sum_i u_i b^-i along the last axis (Horner from the least significant digit)."""
    y = np.zeros(digits.shape[:-1], dtype=np.float64)
    for i in range(digits.shape[-1] - 1, -1, -1):
        y = (y + digits[..., i]) / b
    return y


@dataclass(frozen=True)
class PolyPointExact:
    """One exact coordinate v(x)/p(x) of an infinite-precision polynomial lattice point."""
    residue: GFPoly
    modulus: GFPoly

    def digits(self, count: int):
        return laurent_expand(self.residue, self.modulus, count)

    @property
    def first_nonzero_index(self) -> Optional[int]:
        """m - deg(v); None for the zero point."""
        if self.residue.is_zero:
            return None
        return self.modulus.degree - self.residue.degree

    @property
    def period(self) -> int:
        return expansion_period(self.residue, self.modulus)

    @property
    def value(self) -> Fraction:
        """phi_inf(v/p) = int(v h) / (b^k - 1), with h = (x^k - 1)/p."""
        if self.residue.is_zero:
            return Fraction(0)
        k, h = period_block(self.modulus)
        b = self.modulus.base
        return Fraction(poly_mul(self.residue, h).to_int(), b ** k - 1)

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class PointSet:
    """
    Equal-weight node set.

    points: (n, s) float64 coordinates. For polynomial lattices `digits`
    holds the first base-b digits exactly, `tail` the value of everything
    past them, and `residues`/`modulus` the exact rational points.
    """
    points: np.ndarray
    provenance: str = PLAIN
    base: Optional[int] = None
    m: Optional[int] = None
    digits: Optional[np.ndarray] = None
    tail: Optional[np.ndarray] = None
    residues: Optional[np.ndarray] = None
    modulus: Optional[GFPoly] = None

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def s(self) -> int:
        return self.points.shape[1]

    def exact_point(self, n: int, j: int) -> PolyPointExact:
        if self.residues is None or self.modulus is None:
            raise ValueError("point set carries no exact residues")
        return PolyPointExact(residue=GFPoly(self.modulus.base, tuple(self.residues[n, j])),
                              modulus=self.modulus)


def _then(provenance: str, step: str) -> str:
    """Provenance label with the transformations in the order they were applied."""
    return step if provenance == PLAIN else f"{provenance}+{step}"


def lattice_points(rule: LatticeRule) -> PointSet:
    """x_n = (n z mod N) / N, n = 0 .. N-1."""
    n = np.arange(rule.N, dtype=np.int64)[:, None]
    z = np.asarray(rule.z, dtype=np.int64)[None, :]
    return PointSet(points=((n * z) % rule.N) / rule.N)


def random_shift(ps: PointSet, rng: RandomSource, delta: Optional[np.ndarray] = None) -> PointSet:
    """{x + Delta} with one uniform Delta for all points; `delta` forces the shift."""
    if delta is None:
        delta = rng.random(ps.s)
    delta = np.asarray(delta, dtype=np.float64).reshape(ps.s)
    shifted = np.mod(ps.points + delta[None, :], 1.0)
    # a second uniform shift is again one uniform shift
    provenance = SHIFTED if ps.provenance in (PLAIN, SHIFTED) else _then(ps.provenance, SHIFTED)
    return PointSet(points=shifted, provenance=provenance)


def tent_map(x: np.ndarray) -> np.ndarray:
    return 1.0 - np.abs(2.0 * x - 1.0)


def tent(ps: PointSet) -> PointSet:
    """phi(x) = 1 - |2x - 1| componentwise; values may reach 1 at x = 1/2."""
    return PointSet(points=tent_map(ps.points), provenance=_then(ps.provenance, TENTED))


def poly_lattice_points(rule: PolyLatticeRule, d: Optional[int] = INFINITE) -> PointSet:
    """
    Points phi_d(n(x) q_j(x) / p(x)) for n = 0 .. b^m - 1.

    With d = INFINITE (None) the coordinates are the exact periodic values;
    the float array then carries the nearest double of the first
    default_digit_count(b) digits plus the tail beyond them.
    """
    b, m = rule.b, rule.m
    if d is INFINITE:
        if rule.p == GFPoly(b, (0, 1)) or not is_irreducible(rule.p):
            raise ValueError("infinite precision needs an irreducible modulus p(x) != x")
        ndig = default_digit_count(b)
    else:
        if d < 1:
            raise ValueError(f"precision d must be positive, got {d}")
        ndig = int(d)
    n = b ** m
    residues = np.empty((n, rule.s, m), dtype=np.int64)
    digits = np.empty((n, rule.s, ndig), dtype=np.int64)
    tail = np.zeros((n, rule.s), dtype=np.float64)
    for j, q in enumerate(rule.q):
        V = residue_matrix(rule.p, q)
        residues[:, j, :] = V
        if d is INFINITE:
            both = laurent_digits(V, rule.p, 2 * ndig)
            digits[:, j, :] = both[:, :ndig]
            tail[:, j] = digits_to_float(both[:, ndig:], b) * float(b) ** (-ndig)
        else:
            digits[:, j, :] = laurent_digits(V, rule.p, ndig)
    points = digits_to_float(digits, b) + tail
    return PointSet(points=points, base=b, m=m, digits=digits, tail=tail,
                    residues=residues, modulus=rule.p)


def digital_shift(ps: PointSet, rng: RandomSource, d_shift: Optional[int] = None, base: Optional[int] = None,
                  shift: Optional[np.ndarray] = None) -> PointSet:
    """
    Add one random shift of s * d_shift base-b digits to every point,
    digitwise mod b; digits past d_shift are left unchanged.
    """
    if ps.digits is None or ps.base is None:
        raise ValueError("digital shift needs a point set with exact base-b digits")
    b = ps.base
    if base is not None and base != b:
        raise ValueError(f"shift base {base} does not match point base {b}")
    d_shift = default_digit_count(b) if d_shift is None else int(d_shift)
    if ps.m is not None and d_shift < ps.m:
        raise ValueError(f"d_shift={d_shift} must be >= m={ps.m}")
    if shift is None:
        shift = rng.digits(b, (ps.s, d_shift))
    shift = np.asarray(shift, dtype=np.int64).reshape(ps.s, d_shift)
    have = ps.digits.shape[-1]
    width = max(have, d_shift)
    tail = ps.tail.copy() if ps.tail is not None else np.zeros(ps.points.shape)
    digits = np.zeros(ps.digits.shape[:2] + (width,), dtype=np.int64)
    if width > have and ps.residues is not None and np.any(tail):
        # exact points: expand further so the shift never reaches into the tail
        logger.debug(f"re-expanding exact points to {width} digits for the shift")
        for j in range(ps.s):
            both = laurent_digits(ps.residues[:, j, :], ps.modulus, 2 * width)
            digits[:, j, :] = both[:, :width]
            tail[:, j] = digits_to_float(both[:, width:], b) * float(b) ** (-width)
    else:
        digits[..., :have] = ps.digits
    digits[..., :d_shift] = (digits[..., :d_shift] + shift[None, :, :]) % b
    points = digits_to_float(digits, b) + tail
    return replace(ps, points=points, digits=digits, tail=tail, provenance=DIGITAL_SHIFTED)


def integrate(f: Callable[[np.ndarray], np.ndarray], ps: PointSet):
    """Equal-weight average of f over the nodes; f takes an (n, s) array."""
    values = np.asarray(f(ps.points))
    if values.shape != (ps.n_points,):
        raise ValueError(f"integrand returned shape {values.shape}, expected ({ps.n_points},)")
    if np.iscomplexobj(values):
        return complex(fsum(values.real), fsum(values.imag)) / ps.n_points
    return fsum(values) / ps.n_points


def cosine_wce_oracle(params: SpaceParams, points: np.ndarray, kmax: int) -> float:
    """
    Truncated squared worst-case error in the half-period cosine space:
    sum over 0 != k in {0..kmax}^s of r(k)^-2 (mean_n prod_j c_kj(x_nj))^2,
    with c_0 = 1 and c_k(x) = sqrt(2) cos(pi k x).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n, s = points.shape
    if s > ORACLE_MAX_DIMENSION:
        raise ValueError(f"oracle refuses s={s} > {ORACLE_MAX_DIMENSION}")
    if s > params.s:
        raise ValueError(f"points have dimension {s}, weights cover only {params.s}")
    k = np.arange(kmax + 1, dtype=np.float64)
    basis = []
    weights = []
    for j in range(s):
        C = np.sqrt(2.0) * np.cos(np.pi * k[:, None] * points[None, :, j])
        C[0] = 1.0
        basis.append(C)
        w = np.empty(kmax + 1)
        w[0] = 1.0
        w[1:] = params.weights[j] ** 2 * k[1:] ** (-2.0 * params.alpha)
        weights.append(w)
    if s == 1:
        means = basis[0].mean(axis=1)
        total = fsum(weights[0] * means ** 2)
    elif s == 2:
        means = basis[0] @ basis[1].T / n
        total = fsum((np.outer(weights[0], weights[1]) * means ** 2).ravel())
    else:
        parts = []
        for k1 in range(kmax + 1):
            means = (basis[0][k1][None, :] * basis[1]) @ basis[2].T / n
            parts.append(weights[0][k1] * fsum((np.outer(weights[1], weights[2]) * means ** 2).ravel()))
        total = fsum(parts)
    return total - 1.0


def dump_points(ps: PointSet, exact: bool = False) -> str:
    """One point per line: 17-significant-digit doubles, or base-b digit strings when exact."""
    lines = []
    if exact:
        if ps.digits is None or ps.base is None:
            raise ValueError("exact dump needs a point set with base-b digits")
        sep = '' if ps.base <= 10 else ':'
        for row in ps.digits:
            lines.append(' '.join('0.' + sep.join(str(int(u)) for u in coord) for coord in row))
    else:
        for row in ps.points:
            lines.append(' '.join(f"{v:.17g}" for v in row))
    return '\n'.join(lines) + '\n'


def g_single_frequency(alpha: float, gamma1: float, n_tilde: int) -> Callable[[np.ndarray], np.ndarray]:
    """g(x) = sqrt(2) cos(2 pi N~ x) / r(N~), a unit-norm integrand with zero integral."""
    amplitude = sqrt(2.0) * gamma1 / float(n_tilde) ** alpha

    def g(x):
        x = np.asarray(x, dtype=np.float64)
        return amplitude * np.cos(2.0 * np.pi * n_tilde * (x[:, 0] if x.ndim == 2 else x))

    return g


def h_single_frequency(alpha: float, gamma1: float, n_tilde: int) -> Callable[[np.ndarray], np.ndarray]:
    """h(x_1, .., x_s) = g(x_1)."""
    g = g_single_frequency(alpha, gamma1, n_tilde)
    return lambda x: g(np.atleast_2d(x)[:, :1])
