"""
Weighted Walsh space over a prime base b: mu(k), r~, Walsh functions, the
digit-position weight sigma, the polynomial lattice criterion and its bounds.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple, Union
import logging
import warnings

import numpy as np

from gfpoly import (
    GFPoly, PolyLatticeRule, code_degrees, field_log_tables, index_digits, poly_mod, poly_mod_mul,
)
from kernels import cyclic_candidate_sums, cyclic_update, neumaier_sum
from korobov import BoundReport, SpaceParams, _grid_report, _check_lambda, ORACLE_MAX_DIMENSION

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_KMAX = 1 << 12
# Distance to a digit boundary below which real-input digit extraction is flagged.
DIGIT_BOUNDARY_EPS = 1e-12


class DigitPrecisionWarning(UserWarning):
    """A real coordinate sits too close to a base-b digit boundary."""


def mu(k: int, b: int) -> int:
    """Number of base-b digits of k; mu(0) = 0."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    a = 0
    while k:
        k //= b
        a += 1
    return a


def mu_array(k: np.ndarray, b: int) -> np.ndarray:
    k = np.asarray(k, dtype=np.int64).copy()
    a = np.zeros(k.shape, dtype=np.int64)
    while np.any(k):
        nz = k > 0
        a[nz] += 1
        k //= b
    return a


def _base(params: SpaceParams) -> int:
    if params.base is None:
        raise ValueError("Walsh quantities need a base; set SpaceParams.base")
    return params.base


def r_tilde(params: SpaceParams, k: Sequence[int]) -> float:
    """prod over k_j != 0 of b^(alpha mu(k_j)) / gamma_j; inf if such a gamma_j is zero."""
    b = _base(params)
    if len(k) != params.s:
        raise ValueError(f"index has {len(k)} components, space has {params.s}")
    r = 1.0
    for kj, g in zip(k, params.weights):
        if kj != 0:
            if g == 0.0:
                return float('inf')
            r *= float(b) ** (params.alpha * mu(int(kj), b)) / g
    return r


@dataclass(frozen=True)
class WalshIndex:
    """Walsh index vector k with its base-b digit expansions."""
    k: Tuple[int, ...]
    base: int

    @property
    def digits(self) -> Tuple[Tuple[int, ...], ...]:
        out = []
        for kj in self.k:
            d = []
            while kj:
                kj, r = divmod(kj, self.base)
                d.append(r)
            out.append(tuple(d))
        return tuple(out)

    @property
    def mu(self) -> Tuple[int, ...]:
        return tuple(mu(kj, self.base) for kj in self.k)


def real_digits(x: float, b: int, count: int) -> Tuple[int, ...]:
    """First `count` base-b digits of x in [0, 1); warns near digit boundaries for b != 2."""
    digits = []
    y = float(x)
    for _ in range(count):
        y *= b
        d = int(y)
        frac = y - d
        if b != 2 and frac > 0.0 and (frac < DIGIT_BOUNDARY_EPS or 1.0 - frac < DIGIT_BOUNDARY_EPS):
            warnings.warn(f"coordinate {x!r} is within {DIGIT_BOUNDARY_EPS} of a base-{b} digit boundary",
                          DigitPrecisionWarning, stacklevel=3)
        digits.append(min(d, b - 1))
        y = frac
    return tuple(digits)


def walsh_exponent(kdigits: Sequence[int], xdigits: Sequence[int], b: int) -> int:
    """sum_i kappa_i xi_(i+1) mod b."""
    if len(xdigits) < len(kdigits):
        raise ValueError(f"need {len(kdigits)} digits of x, got {len(xdigits)}")
    return sum(kd * xd for kd, xd in zip(kdigits, xdigits)) % b


def walsh_eval(k: Union[WalshIndex, int, Sequence[int]], x, b: int) -> complex:
    """
    wal_k(x) = prod_j omega_b^(sum_i kappa_ji xi_j,i+1).

    x is either a real vector (one float per component) or a sequence of
    exact digit sequences (one per component). Exponents are accumulated
    as integers mod b and converted to a root of unity once.
    """
    if not isinstance(k, WalshIndex):
        k = WalshIndex(tuple(int(v) for v in np.atleast_1d(k)), b)
    if k.base != b:
        raise ValueError(f"index base {k.base} does not match {b}")
    kdigits = k.digits
    if len(kdigits) == 1:
        arr = np.asarray(x)
        if arr.ndim == 0 or (arr.ndim == 1 and np.issubdtype(arr.dtype, np.integer)):
            x = [x]
    if len(x) != len(kdigits):
        raise ValueError(f"point has {len(x)} components, index has {len(kdigits)}")
    e = 0
    for kd, xj in zip(kdigits, x):
        if np.ndim(xj) == 0:
            xd = real_digits(float(xj), b, len(kd))
        else:
            xd = tuple(int(v) for v in xj)
        e += walsh_exponent(kd, xd, b)
    e %= b
    if b == 2:
        return complex(1 - 2 * e)
    return complex(np.exp(2j * np.pi * e / b))


def sigma_weight(alpha: float, b: int, first_nonzero_index) -> float:
    """
    sigma(x) from the index r of the first nonzero base-b digit of x;
    pass None (or 0) for x = 0.
    """
    if not alpha > 0.5:
        raise ValueError(f"alpha must be > 1/2, got {alpha}")
    b2a = float(b) ** (2.0 * alpha)
    base_term = (b - 1) / (b2a - b)
    if not first_nonzero_index:
        return base_term
    r = int(first_nonzero_index)
    return base_term - (b2a - 1.0) / (float(b) ** ((2.0 * alpha - 1.0) * r) * (b2a - b))


def sigma_table(alpha: float, b: int, m: int) -> np.ndarray:
    """sigma at r = 0 (zero point) .. m."""
    return np.array([sigma_weight(alpha, b, r) for r in range(m + 1)], dtype=np.float64)


def sigma_series(alpha: float, b: int, digits: Sequence[int], K: int) -> float:
    """Truncated series sum_{k=1}^{K} b^(-2 alpha mu(k)) wal_k(x) for the digit stream of x."""
    ks = np.arange(1, K + 1, dtype=np.int64)
    need = mu(K, b)
    if len(digits) < need:
        raise ValueError(f"need {need} digits, got {len(digits)}")
    e = np.zeros(K, dtype=np.int64)
    kk = ks.copy()
    for i in range(need):
        e += (kk % b) * int(digits[i])
        kk //= b
    e %= b
    wal = np.exp(2j * np.pi * e / b)
    terms = float(b) ** (-2.0 * alpha * mu_array(ks, b)) * wal
    return float(np.real(np.sum(terms)))


def first_nonzero_indices(rule: PolyLatticeRule) -> np.ndarray:
    """(b^m, s) array of r = m - deg(n(x) q_j(x) mod p), 0 where the residue is zero."""
    logs = field_log_tables(rule.p)
    deg = code_degrees(rule.b, rule.m)
    n_codes = np.arange(rule.n_points, dtype=np.int64)
    out = np.zeros((rule.n_points, rule.s), dtype=np.int64)
    for j, q in enumerate(rule.q):
        qc = q.to_int()
        if qc == 0:
            continue
        codes = logs.exp[(logs.log[n_codes[1:]] + logs.log[qc]) % logs.order]
        out[1:, j] = rule.m - deg[codes]
    return out


def _log_order_table(alpha: float, rule_b: int, m: int, p: GFPoly) -> Tuple[np.ndarray, float]:
    """sigma at the code exp[i], i = 0 .. b^m - 2, plus sigma at zero."""
    logs = field_log_tables(p)
    sig = sigma_table(alpha, rule_b, m)
    deg = code_degrees(rule_b, m)
    return sig[m - deg[logs.exp]], float(sig[0])


def criterion_walsh_kernel(params: SpaceParams, rule: PolyLatticeRule) -> float:
    """
    R~(p, q) = -1 + b^-m sum_n prod_j [1 + gamma_j^2 sigma(x_n,j)].

    Nonzero n run in discrete-log order of F_b[x]/(p), which turns
    n -> n q into a cyclic shift by log q; n = 0 enters as the starting
    value of the compensated sum. CBC uses the identical path.
    """
    b = _base(params)
    if b != rule.b:
        raise ValueError(f"space base {b} does not match rule base {rule.b}")
    if rule.s > params.s:
        raise ValueError(f"rule has dimension {rule.s}, weights cover only {params.s}")
    if any(q.is_zero for q in rule.q):
        raise ValueError("generating polynomials must be nonzero")
    logs = field_log_tables(rule.p)
    table, sig0 = _log_order_table(params.alpha, rule.b, rule.m, rule.p)
    g2 = params.gamma[:rule.s] ** 2
    theta = np.ones(logs.order, dtype=np.float64)
    theta0 = 1.0
    for j in range(rule.s - 1):
        lq = int(logs.log[rule.q[j].to_int()])
        cyclic_update(theta, table, g2[j], lq, 1)
        theta0 *= 1.0 + g2[j] * sig0
    lq = int(logs.log[rule.q[-1].to_int()])
    total = cyclic_candidate_sums(theta, table, g2[-1], np.array([lq], dtype=np.int64),
                                  np.ones(1, dtype=np.int64), theta0 * (1.0 + g2[-1] * sig0))[0]
    return -1.0 + total / rule.n_points


def _residue_codes(ks: np.ndarray, q: GFPoly, p: GFPoly) -> np.ndarray:
    """Integer codes of k(x) q(x) mod p(x) for every k in ks (vectorized over digits of k)."""
    b, m = p.base, p.degree
    ndig = max(mu(int(ks.max()), b), 1)
    W = np.zeros((ndig, m), dtype=np.int64)
    row = poly_mod(q, p)
    x = GFPoly(b, (0, 1))
    for i in range(ndig):
        W[i] = row.padded(m)
        row = poly_mod_mul(row, x, p)
    kd = (ks[:, None] // (b ** np.arange(ndig, dtype=np.int64))[None, :]) % b
    rows = (kd @ W) % b
    return rows @ (b ** np.arange(m, dtype=np.int64))


def _add_table(b: int, m: int) -> np.ndarray:
    d = index_digits(b, m)
    summed = (d[:, None, :] + d[None, :, :]) % b
    return summed @ (b ** np.arange(m, dtype=np.int64))


def criterion_walsh_oracle(params: SpaceParams, rule: PolyLatticeRule, kmax: int = DEFAULT_ORACLE_KMAX) -> float:
    """
    Dual sum over 0 < k_j <= kmax of 1/r~(k)^2, with k in the dual iff
    sum_j k_j(x) q_j(x) = 0 mod p(x). Indices are grouped by residue code
    and the dual condition is a convolution over (F_b^m, +).
    """
    b = _base(params)
    if rule.s > ORACLE_MAX_DIMENSION:
        raise ValueError(f"oracle refuses s={rule.s} > {ORACLE_MAX_DIMENSION}")
    if rule.s > params.s:
        raise ValueError(f"rule has dimension {rule.s}, weights cover only {params.s}")
    size = rule.n_points
    ks = np.arange(kmax + 1, dtype=np.int64)
    decay = float(b) ** (-2.0 * params.alpha * mu_array(ks, b))
    acc = None
    for j in range(rule.s):
        w = np.where(ks == 0, 1.0, params.weights[j] ** 2 * decay)
        a = np.zeros(size, dtype=np.float64)
        np.add.at(a, _residue_codes(ks, rule.q[j], rule.p), w)
        if acc is None:
            acc = a
        else:
            plus = _add_table(b, rule.m)
            nxt = np.zeros(size, dtype=np.float64)
            np.add.at(nxt, plus.ravel(), (acc[:, None] * a[None, :]).ravel())
            acc = nxt
    return float(acc[0] - 1.0)


def walsh_oracle_tail_bound(params: SpaceParams, b: int, kmax: int, s: int = None) -> float:
    """prod(1 + g^2 (b-1)/(b^2a - b)) - prod(1 + g^2 sum_{k<=kmax} b^(-2 alpha mu(k)))."""
    s = params.s if s is None else s
    g2 = params.gamma[:s] ** 2
    full_sum = (b - 1) / (float(b) ** (2.0 * params.alpha) - b)
    ks = np.arange(1, kmax + 1, dtype=np.int64)
    cut_sum = neumaier_sum(float(b) ** (-2.0 * params.alpha * mu_array(ks, b)))
    return float(max(np.prod(1.0 + g2 * full_sum) - np.prod(1.0 + g2 * cut_sum), 0.0))


def walsh_wce_bound(params: SpaceParams, b: int, m: int, tau: float, lam: float) -> float:
    """((1/((1-tau)(b^m-1))) * (prod_j (1 + gamma_j^(1/lambda) (b-1)/(b^(alpha/lambda) - b)) - 1))^lambda."""
    _check_lambda(params.alpha, lam)
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    c = (b - 1) / (float(b) ** (params.alpha / lam) - b)
    inner = float(np.prod(1.0 + params.gamma ** (1.0 / lam) * c) - 1.0)
    return (inner / ((1.0 - tau) * (b ** m - 1))) ** lam


def walsh_d_star(params: SpaceParams, b: int, m: int, tau: float, lambda_grid: Sequence[float]) -> BoundReport:
    """Grid minimum of walsh_wce_bound, flagged when it exceeds 1."""
    report = _grid_report(lambda lam: walsh_wce_bound(params, b, m, tau, lam), lambda_grid)
    if not report.assumption_holds:
        logger.warning(f"Walsh bound minimum {report.value:.6g} > 1 for b={b}, m={m}")
    return report
