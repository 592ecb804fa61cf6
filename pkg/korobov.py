"""
Weighted Korobov space: r_{alpha,gamma}, the kernel criterion R, a dual
lattice oracle, the worst-case-error bounds and D*_M.
"""
from dataclasses import dataclass, field
from math import ceil, exp, isinf
from typing import Optional, Sequence, Tuple
import logging

import numpy as np

from kernels import cyclic_candidate_sums, cyclic_update, neumaier_sum
from numtheory import kernel_weight_table, korobov_kernel_weight, riemann_zeta

logger = logging.getLogger(__name__)

ORACLE_MAX_DIMENSION = 3
DEFAULT_GRID_POINTS = 41


@dataclass(frozen=True)
class SpaceParams:
    """Smoothness alpha, weights gamma_1..gamma_s and (for Walsh spaces) the base b."""
    alpha: float
    weights: Tuple[float, ...]
    base: Optional[int] = None
    weight_spec: str = field(default='', compare=False)

    def __post_init__(self):
        if not self.alpha > 0.5:
            raise ValueError(f"alpha must be > 1/2, got {self.alpha}")
        if not self.weights:
            raise ValueError("at least one weight is required")
        w = tuple(float(g) for g in self.weights)
        if any(not 0.0 <= g <= 1.0 for g in w):
            raise ValueError(f"weights must lie in [0, 1], got {w}")
        object.__setattr__(self, 'weights', w)

    @property
    def s(self) -> int:
        return len(self.weights)

    @property
    def gamma(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    @classmethod
    def from_weight_spec(cls, alpha: float, spec: str, s: int, base: Optional[int] = None) -> 'SpaceParams':
        """
        Build parameters from the weight mini-language.

        Args:
            alpha: smoothness
            spec: "poly:p" (gamma_j = j^-p), "list:g1,g2,..." or "const:c"
            s: dimension
            base: Walsh base, if any

        Returns:
            SpaceParams with exactly s weights
        """
        if s < 1:
            raise ValueError(f"dimension must be positive, got {s}")
        kind, _, arg = spec.partition(':')
        try:
            if kind == 'poly':
                p = float(arg)
                weights = tuple(float(j) ** (-p) for j in range(1, s + 1))
            elif kind == 'list':
                values = [float(t) for t in arg.split(',') if t.strip()]
                if len(values) < s:
                    raise ValueError(f"weight list has {len(values)} entries, need {s}")
                weights = tuple(values[:s])
            elif kind == 'const':
                weights = (float(arg),) * s
            else:
                raise ValueError(f"unknown weight family {kind!r}")
        except ValueError as e:
            raise ValueError(f"bad weight spec {spec!r}: {e}") from e
        return cls(alpha=float(alpha), weights=weights, base=base, weight_spec=spec)

    def head(self, s: int) -> 'SpaceParams':
        """The same space restricted to the first s coordinates."""
        return SpaceParams(self.alpha, self.weights[:s], self.base, self.weight_spec)


@dataclass(frozen=True)
class LatticeRule:
    """Rank-1 lattice rule with N points and generating vector z."""
    N: int
    z: Tuple[int, ...]

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        z = tuple(int(v) for v in self.z)
        if not z or any(not 1 <= v <= self.N - 1 for v in z):
            raise ValueError(f"components of z must lie in [1, {self.N - 1}], got {z}")
        object.__setattr__(self, 'z', z)

    @property
    def s(self) -> int:
        return len(self.z)


def r_weight(params: SpaceParams, k: Sequence[int]) -> float:
    """prod over k_j != 0 of |k_j|^alpha / gamma_j; inf when such a gamma_j is zero."""
    if len(k) != params.s:
        raise ValueError(f"frequency has {len(k)} components, space has {params.s}")
    r = 1.0
    for kj, g in zip(k, params.weights):
        if kj != 0:
            if g == 0.0:
                return float('inf')
            r *= abs(kj) ** params.alpha / g
    return r


def _check_rule(params: SpaceParams, rule: LatticeRule):
    if rule.s > params.s:
        raise ValueError(f"rule has dimension {rule.s}, weights cover only {params.s}")


def criterion_kernel(params: SpaceParams, rule: LatticeRule) -> float:
    """
    R(z) = -1 + (1/N) sum_n prod_j [1 + gamma_j^2 omega_alpha({n z_j / N})].

    Coordinates are folded into the cached product one by one and the last
    one goes through the same compensated candidate kernel the CBC search
    uses, so a constructed rule reproduces its recorded criterion exactly.
    """
    _check_rule(params, rule)
    omega = kernel_weight_table(params.alpha, rule.N)
    theta = np.ones(rule.N, dtype=np.float64)
    g2 = params.gamma[:rule.s] ** 2
    for j in range(rule.s - 1):
        cyclic_update(theta, omega, g2[j], 0, rule.z[j])
    total = cyclic_candidate_sums(theta, omega, g2[-1], np.zeros(1, dtype=np.int64),
                                  np.array([rule.z[-1]], dtype=np.int64), 0.0)[0]
    return -1.0 + total / rule.N


def _group_weights(codes: np.ndarray, weights: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=np.float64)
    np.add.at(out, codes, weights)
    return out


def criterion_oracle(params: SpaceParams, rule: LatticeRule, kmax: int) -> float:
    """
    Brute-force dual sum over 0 < |k|_inf <= kmax of 1/r(k)^2.

    Frequencies are grouped by k_j z_j mod N, so the dual condition becomes a
    cyclic convolution evaluated at zero.
    """
    _check_rule(params, rule)
    if rule.s > ORACLE_MAX_DIMENSION:
        raise ValueError(f"oracle refuses s={rule.s} > {ORACLE_MAX_DIMENSION}")
    if kmax < rule.N:
        raise ValueError(f"kmax={kmax} must be >= N={rule.N}")
    N = rule.N
    k = np.arange(-kmax, kmax + 1, dtype=np.int64)
    absk = np.abs(k).astype(np.float64)
    acc = None
    for j in range(rule.s):
        g2 = params.weights[j] ** 2
        w = np.where(k == 0, 1.0, g2 * np.where(k == 0, 1.0, absk) ** (-2.0 * params.alpha))
        a = _group_weights((k * rule.z[j]) % N, w, N)
        if acc is None:
            acc = a
        else:
            # (acc * a)[c] = sum_{c'} acc[c'] a[c - c']
            idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
            acc = (acc[None, :] * a[idx]).sum(axis=1)
    return float(acc[0] - 1.0)


def _partial_zeta(alpha: float, kmax: int) -> float:
    k = np.arange(1, kmax + 1, dtype=np.float64)
    return float(neumaier_sum(k ** (-2.0 * alpha)))


def oracle_tail_bound(params: SpaceParams, kmax: int, s: Optional[int] = None) -> float:
    """Upper bound on what the oracle misses: prod(1 + 2 g^2 zeta(2a)) - prod(1 + 2 g^2 sum_{k<=kmax} k^-2a)."""
    s = params.s if s is None else s
    g2 = params.gamma[:s] ** 2
    full = np.prod(1.0 + 2.0 * g2 * riemann_zeta(2.0 * params.alpha))
    cut = np.prod(1.0 + 2.0 * g2 * _partial_zeta(params.alpha, kmax))
    return float(max(full - cut, 0.0))


def worst_case_error_sq(params: SpaceParams, points: np.ndarray) -> float:
    """
    Squared worst-case error of an arbitrary equal-weight rule,
    -1 + N^-2 sum_{x,y} prod_j [1 + gamma_j^2 omega_alpha({x_j - y_j})].
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n, s = points.shape
    if s > params.s:
        raise ValueError(f"points have dimension {s}, weights cover only {params.s}")
    g2 = params.gamma[:s] ** 2
    rows = np.empty(n, dtype=np.float64)
    for i in range(n):
        diff = np.mod(points[i][None, :] - points, 1.0)
        vals = np.atleast_2d(korobov_kernel_weight(params.alpha, diff))
        rows[i] = neumaier_sum(np.prod(1.0 + g2[None, :] * vals, axis=1))
    return -1.0 + neumaier_sum(rows) / (n * n)


def _check_lambda(alpha: float, lam: float):
    if not 0.5 <= lam < alpha:
        raise ValueError(f"lambda must lie in [1/2, {alpha}), got {lam}")


def weight_sum(params: SpaceParams, lam: float) -> float:
    """sum_j gamma_j^(1/lambda)."""
    return float(np.sum(params.gamma ** (1.0 / lam)))


def _pool_factor(M: int, tau: float) -> float:
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    if M < 2:
        raise ValueError(f"M must be >= 2, got {M}")
    return 2.0 / ((1.0 - tau) * M)


def wce_bound(params: SpaceParams, M: int, tau: float, lam: float) -> float:
    """
    Worst-case-error bound for any rule from the randomized CBC with modulus
    pool P_M: (2/((1-tau)M) * (prod_j (1 + gamma_j^(1/lambda) 2 zeta(alpha/lambda)) - 1))^lambda.
    """
    _check_lambda(params.alpha, lam)
    c = 2.0 * riemann_zeta(params.alpha / lam)
    g = params.gamma ** (1.0 / lam)
    inner = float(np.prod(1.0 + g * c) - 1.0)
    return (_pool_factor(M, tau) * inner) ** lam


def wce_bound_dimension_free(params: SpaceParams, M: int, tau: float, lam: float) -> float:
    """Same bound with the product replaced by exp(2 zeta(alpha/lambda) sum_j gamma_j^(1/lambda))."""
    _check_lambda(params.alpha, lam)
    c = 2.0 * riemann_zeta(params.alpha / lam)
    inner = exp(c * weight_sum(params, lam)) - 1.0
    return (_pool_factor(M, tau) * inner) ** lam


def default_lambda_grid(alpha: float, count: int = DEFAULT_GRID_POINTS) -> Tuple[float, ...]:
    """count equispaced points in [1/2, alpha - 0.01]."""
    hi = alpha - 0.01
    if hi < 0.5:
        return (0.5,) if alpha > 0.5 else ()
    return tuple(float(v) for v in np.linspace(0.5, hi, count))


@dataclass(frozen=True)
class BoundReport:
    """Grid evaluation of a bound; `value` is the grid minimum."""
    values: Tuple[Tuple[float, float], ...]
    value: float
    best_lambda: float

    @property
    def assumption_holds(self) -> bool:
        return self.value <= 1.0


def _grid_report(bound, grid: Sequence[float]) -> BoundReport:
    if not grid:
        raise ValueError("lambda grid is empty")
    values = tuple((float(lam), float(bound(lam))) for lam in grid)
    best_lambda, value = min(values, key=lambda lv: (lv[1], lv[0]))
    return BoundReport(values=values, value=value, best_lambda=best_lambda)


def d_star(params: SpaceParams, M: int, tau: float, lambda_grid: Sequence[float]) -> BoundReport:
    """D*_M: minimum of wce_bound over the grid, flagged when it exceeds 1."""
    report = _grid_report(lambda lam: wce_bound(params, M, tau, lam), lambda_grid)
    if not report.assumption_holds:
        logger.warning(f"D*_M = {report.value:.6g} > 1 for M={M}; bound assumption violated")
    return report


def candidate_count(count: int, tau: float) -> int:
    """ceil(tau * count), the size of the retained candidate set."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    return max(1, ceil(tau * count - 1e-12))
