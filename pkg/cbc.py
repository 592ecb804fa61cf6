"""
Randomized component-by-component construction.

construct_lattice draws a prime N from P_M and then, coordinate by
coordinate, ranks every candidate z_l by the Korobov criterion and picks
uniformly among the best ceil(tau (N-1)). construct_poly_lattice does the
same over F_b[x] with a random monic irreducible modulus and the Walsh
criterion.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union
import logging

import numpy as np

from gfpoly import (
    GFPoly, PolyLatticeRule, enumerate_monic_irreducibles, field_log_tables, format_poly, parse_poly,
)
from kernels import cyclic_candidate_sums, cyclic_update
from korobov import LatticeRule, SpaceParams, candidate_count
from numtheory import kernel_weight_table, primes_in_half_open_range
from walsh import _log_order_table

logger = logging.getLogger(__name__)

SCHEMA = 'rqmc/1'
# Neighbouring criteria within this relative distance count as ties.
TIE_RTOL = 1e-12
_UINT64_RANGE = 1 << 64


class EmptyPrimeRangeError(ValueError):
    """P_M holds no prime, so no modulus can be drawn."""


class RandomSource:
    """
    Seeded PCG64 stream; every random choice of a construction or a
    randomization is drawn from one instance in a fixed order.
    """

    def __init__(self, seed: int, spawn_key: Tuple[int, ...] = ()):
        if not 0 <= int(seed) < _UINT64_RANGE:
            raise ValueError(f"seed must be a 64-bit non-negative integer, got {seed}")
        self.seed = int(seed)
        self.spawn_key = tuple(spawn_key)
        self._seq = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._bitgen = np.random.PCG64(self._seq)
        self.generator = np.random.Generator(self._bitgen)

    @classmethod
    def for_replication(cls, master_seed: int, r: int, *substream: int) -> 'RandomSource':
        """Independent stream for replication r (and optional sub-stream keys) of a run seeded with master_seed."""
        return cls(master_seed, spawn_key=(int(r),) + tuple(int(k) for k in substream))

    def pick_uniform(self, n: int) -> int:
        """Exactly uniform integer in [0, n) by rejection on raw 64-bit words."""
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        limit = _UINT64_RANGE - _UINT64_RANGE % n
        while True:
            x = int(self._bitgen.random_raw())
            if x < limit:
                return x % n

    def random(self, size) -> np.ndarray:
        """Uniform doubles in [0, 1)."""
        return self.generator.random(size)

    def digits(self, b: int, size) -> np.ndarray:
        """Uniform base-b digits."""
        return self.generator.integers(0, b, size=size, dtype=np.int64)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, spawn_key={self.spawn_key})"


def pick_uniform(rng: RandomSource, n: int) -> int:
    return rng.pick_uniform(n)


@dataclass
class CbcTrace:
    """Audit trail of one randomized CBC run."""
    kind: str
    modulus: Union[int, GFPoly]
    candidate_set_sizes: List[int] = field(default_factory=list)
    components: List[int] = field(default_factory=list)
    criteria: List[float] = field(default_factory=list)
    # (candidates, criteria, ranking order) per coordinate l >= 2 when requested
    rankings: Optional[List[Tuple[np.ndarray, np.ndarray, np.ndarray]]] = None

    @property
    def final_criterion(self) -> float:
        return self.criteria[-1]

    @property
    def pool_size(self) -> int:
        """Number of distinct generating vectors the random pick ranges over."""
        size = 1
        for c in self.candidate_set_sizes:
            size *= c
        return size

    def to_dict(self) -> dict:
        modulus = format_poly(self.modulus) if isinstance(self.modulus, GFPoly) else int(self.modulus)
        return {
            'modulus': modulus,
            'candidate_set_sizes': [int(c) for c in self.candidate_set_sizes],
            'components': [int(c) for c in self.components],
            'criteria': [float(c) for c in self.criteria],
            'final_criterion': float(self.final_criterion),
        }


def _tie_groups(criteria: np.ndarray) -> np.ndarray:
    """Group index per criterion; sorted neighbours within TIE_RTOL share a group."""
    order = np.argsort(criteria, kind="stable")
    ranked = criteria[order]
    fresh = ~np.isclose(ranked[1:], ranked[:-1], rtol=TIE_RTOL, atol=0.0)
    groups = np.zeros(criteria.shape, dtype=np.int64)
    groups[order[1:]] = np.cumsum(fresh)
    return groups


def rank_candidates(candidates: np.ndarray, criteria: np.ndarray) -> np.ndarray:
    """
    Ordering (indices into candidates) by ascending criterion, ties broken by
    ascending candidate. Criteria within TIE_RTOL of their sorted
    neighbour tie.
    """
    candidates = np.asarray(candidates)
    criteria = np.asarray(criteria, dtype=np.float64)
    if candidates.shape != criteria.shape:
        raise ValueError("candidates and criteria must have the same shape")
    return np.lexsort((candidates, _tie_groups(criteria)))


def _check_tau(tau: float):
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")


def construct_lattice(params: SpaceParams, M: int, tau: float, rng: RandomSource,
                      keep_rankings: bool = False) -> Tuple[LatticeRule, CbcTrace]:
    """
    Randomized CBC for a rank-1 lattice rule.

    Args:
        params: smoothness and weights; the dimension is params.s
        M: upper end of the modulus pool P_M
        tau: retained fraction of ranked candidates, in (0, 1)
        rng: the single random stream (modulus first, then z_2 .. z_s)
        keep_rankings: record full candidate rankings in the trace

    Returns:
        (rule, trace)
    """
    _check_tau(tau)
    pool = primes_in_half_open_range(M)
    if not pool:
        raise EmptyPrimeRangeError(f"no prime in ({pool.lower}, {M}]")
    N = pool.primes[rng.pick_uniform(len(pool))]

    omega = kernel_weight_table(params.alpha, N)
    g2 = params.gamma ** 2
    theta = np.ones(N, dtype=np.float64)
    trace = CbcTrace(kind='lattice', modulus=N, rankings=[] if keep_rankings else None)

    first = cyclic_candidate_sums(theta, omega, g2[0], np.zeros(1, dtype=np.int64),
                                  np.ones(1, dtype=np.int64), 0.0)[0]
    trace.candidate_set_sizes.append(1)
    trace.components.append(1)
    trace.criteria.append(-1.0 + first / N)
    cyclic_update(theta, omega, g2[0], 0, 1)

    candidates = np.arange(1, N, dtype=np.int64)
    # R(z) == R(N - z): evaluate the lower half and mirror
    half = np.arange(1, N // 2 + 1, dtype=np.int64)
    mirror = np.minimum(candidates, N - candidates) - 1
    keep = candidate_count(N - 1, tau)
    z = [1]
    for ell in range(1, params.s):
        sums = cyclic_candidate_sums(theta, omega, g2[ell], np.zeros_like(half), half, 0.0)
        criteria = -1.0 + sums[mirror] / N
        order = rank_candidates(candidates, criteria)
        pick = order[rng.pick_uniform(keep)]
        zl = int(candidates[pick])
        z.append(zl)
        trace.candidate_set_sizes.append(keep)
        trace.components.append(zl)
        trace.criteria.append(float(criteria[pick]))
        if keep_rankings:
            trace.rankings.append((candidates, criteria, order))
        cyclic_update(theta, omega, g2[ell], 0, zl)

    rule = LatticeRule(N=N, z=tuple(z))
    logger.info(f"Constructed lattice rule N={N}, s={rule.s}, criterion={trace.final_criterion:.6e}")
    return rule, trace


def construct_poly_lattice(params: SpaceParams, b: int, m: int, tau: float, rng: RandomSource,
                           keep_rankings: bool = False) -> Tuple[PolyLatticeRule, CbcTrace]:
    """
    Randomized CBC for a rank-1 polynomial lattice rule with b^m points.

    The modulus is drawn uniformly from the monic irreducibles of degree m
    other than x, q_1 = 1, and every later q_l ranges over the b^m - 1 nonzero
    polynomials of degree < m, ranked by the Walsh criterion with ties
    broken by integer encoding.
    """
    _check_tau(tau)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    x = GFPoly(b, (0, 1))
    pool = [f for f in enumerate_monic_irreducibles(b, m) if f != x]
    p = pool[rng.pick_uniform(len(pool))]

    logs = field_log_tables(p)
    table, sig0 = _log_order_table(params.alpha, b, m, p)
    g2 = params.gamma ** 2
    theta = np.ones(logs.order, dtype=np.float64)
    theta0 = 1.0
    n_points = b ** m
    trace = CbcTrace(kind='polylattice', modulus=p, rankings=[] if keep_rankings else None)

    first = cyclic_candidate_sums(theta, table, g2[0], np.zeros(1, dtype=np.int64),
                                  np.ones(1, dtype=np.int64), theta0 * (1.0 + g2[0] * sig0))[0]
    trace.candidate_set_sizes.append(1)
    trace.components.append(1)
    trace.criteria.append(-1.0 + first / n_points)
    cyclic_update(theta, table, g2[0], 0, 1)
    theta0 *= 1.0 + g2[0] * sig0

    candidates = np.arange(1, n_points, dtype=np.int64)
    starts = logs.log[candidates]
    steps = np.ones_like(candidates)
    keep = candidate_count(n_points - 1, tau)
    q = [GFPoly(b, (1,))]
    for ell in range(1, params.s):
        sums = cyclic_candidate_sums(theta, table, g2[ell], starts, steps, theta0 * (1.0 + g2[ell] * sig0))
        criteria = -1.0 + sums / n_points
        order = rank_candidates(candidates, criteria)
        pick = order[rng.pick_uniform(keep)]
        code = int(candidates[pick])
        q.append(GFPoly.from_int(code, b))
        trace.candidate_set_sizes.append(keep)
        trace.components.append(code)
        trace.criteria.append(float(criteria[pick]))
        if keep_rankings:
            trace.rankings.append((candidates, criteria, order))
        cyclic_update(theta, table, g2[ell], int(starts[pick]), 1)
        theta0 *= 1.0 + g2[ell] * sig0

    rule = PolyLatticeRule(b=b, m=m, p=p, q=tuple(q))
    logger.info(f"Constructed polynomial lattice rule b={b}, m={m}, p={format_poly(p)}, "
                f"criterion={trace.final_criterion:.6e}")
    return rule, trace


def rule_to_json(rule, params: Optional[SpaceParams] = None, seed: Optional[int] = None,
                 tau: Optional[float] = None, trace: Optional[CbcTrace] = None) -> dict:
    """The rqmc/1 document for a lattice or polynomial lattice rule."""
    if isinstance(rule, LatticeRule):
        doc = {'schema': SCHEMA, 'kind': 'lattice', 'N': int(rule.N), 'z': [int(v) for v in rule.z]}
    elif isinstance(rule, PolyLatticeRule):
        doc = {'schema': SCHEMA, 'kind': 'polylattice', 'b': int(rule.b), 'm': int(rule.m),
               'p': format_poly(rule.p), 'q': [format_poly(qj) for qj in rule.q]}
    else:
        raise ValueError(f"not a rule: {rule!r}")
    doc['s'] = rule.s
    if seed is not None:
        doc['seed'] = int(seed)
    if tau is not None:
        doc['tau'] = float(tau)
    if params is not None:
        doc['alpha'] = float(params.alpha)
        doc['weights'] = params.weight_spec or 'list:' + ','.join(repr(g) for g in params.weights)
    if trace is not None:
        doc['trace'] = trace.to_dict()
    return doc


def rule_from_json(doc: dict):
    """Inverse of rule_to_json (metadata keys are ignored)."""
    schema = doc.get('schema')
    if schema != SCHEMA:
        raise ValueError(f"unsupported rule schema {schema!r}, expected {SCHEMA!r}")
    kind = doc.get('kind')
    try:
        if kind == 'lattice':
            return LatticeRule(N=int(doc['N']), z=tuple(int(v) for v in doc['z']))
        if kind == 'polylattice':
            b = int(doc['b'])
            return PolyLatticeRule(b=b, m=int(doc['m']), p=parse_poly(doc['p'], b),
                                   q=tuple(parse_poly(t, b) for t in doc['q']))
    except KeyError as e:
        raise ValueError(f"rule document is missing {e}") from e
    raise ValueError(f"unknown rule kind {kind!r}")


def params_from_json(doc: dict, s: Optional[int] = None) -> Optional[SpaceParams]:
    """SpaceParams recorded alongside a rule, if any."""
    if 'alpha' not in doc or 'weights' not in doc:
        return None
    base = int(doc['b']) if doc.get('kind') == 'polylattice' else None
    return SpaceParams.from_weight_spec(float(doc['alpha']), doc['weights'], s or int(doc['s']), base=base)
