"""
Variance-decay experiments: test integrands, the Monte Carlo baseline, the
randomized lattice and polynomial lattice estimators, replication statistics
and slope fitting, plus CSV / gnuplot artifacts.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import fsum, log
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import csv
import io
import logging

import numpy as np

from cbc import RandomSource, construct_lattice, construct_poly_lattice
from korobov import LatticeRule, SpaceParams
from numtheory import bernoulli_value, primes_in_half_open_range
from pointset import (
    PointSet, default_digit_count, digital_shift, g_single_frequency, integrate, lattice_points,
    poly_lattice_points, random_shift, tent,
)

logger = logging.getLogger(__name__)

MC = 'mc'
LATTICE_SHIFT_TENT = 'rand-lattice-shift-tent'
LATTICE_SHIFT = 'rand-lattice-shift'
POLYLATTICE_DIGITAL_SHIFT = 'rand-polylattice-digital-shift'
METHODS = (MC, LATTICE_SHIFT_TENT, LATTICE_SHIFT, POLYLATTICE_DIGITAL_SHIFT)
MIN_FIT_POINTS = 4


def f1(x: np.ndarray) -> np.ndarray:
    """prod_j [1 + B_2(x_j)/j^2] - 1."""
    x = np.atleast_2d(x)
    j = np.arange(1, x.shape[1] + 1, dtype=np.float64)
    return np.prod(1.0 + bernoulli_value(2, x) / j ** 2, axis=1) - 1.0


def f2(x: np.ndarray) -> np.ndarray:
    """prod_j [1 + B_4(x_j)/j^4] - 1."""
    x = np.atleast_2d(x)
    j = np.arange(1, x.shape[1] + 1, dtype=np.float64)
    return np.prod(1.0 + bernoulli_value(4, x) / j ** 4, axis=1) - 1.0


def f3(x: np.ndarray) -> np.ndarray:
    """prod_j [1 + (|4 x_j - 2| - 1)/j^2] - 1."""
    x = np.atleast_2d(x)
    j = np.arange(1, x.shape[1] + 1, dtype=np.float64)
    return np.prod(1.0 + (np.abs(4.0 * x - 2.0) - 1.0) / j ** 2, axis=1) - 1.0


def const1(x: np.ndarray) -> np.ndarray:
    return np.ones(np.atleast_2d(x).shape[0])


INTEGRANDS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'f1': f1, 'f2': f2, 'f3': f3, 'const1': const1,
}

# (alpha, weight spec) each integrand is run with
INTEGRAND_SPACES = {
    'f1': (2.0, 'poly:2'),
    'f2': (4.0, 'poly:4'),
    'f3': (2.0, 'poly:2'),
    'const1': (2.0, 'poly:2'),
}


@dataclass(frozen=True)
class ExperimentConfig:
    method: str
    integrand: str
    s: int
    sizes: Tuple[int, ...]
    replications: int
    seed: int
    alpha: float = 2.0
    weight_spec: str = 'poly:2'
    tau: float = 0.5
    base: int = 2

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.integrand not in INTEGRANDS:
            raise ValueError(f"unknown integrand {self.integrand!r}; choose from {tuple(INTEGRANDS)}")
        if self.replications < 2:
            raise ValueError(f"need at least 2 replications, got {self.replications}")
        sizes = tuple(int(v) for v in self.sizes)
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"size schedule must be strictly increasing, got {sizes}")
        object.__setattr__(self, 'sizes', sizes)
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")

    @classmethod
    def for_integrand(cls, method: str, integrand: str, s: int, sizes: Sequence[int], replications: int,
                      seed: int, tau: float = 0.5, base: int = 2) -> 'ExperimentConfig':
        """Config with the smoothness and weights matched to the integrand."""
        alpha, spec = INTEGRAND_SPACES.get(integrand, (2.0, 'poly:2'))
        return cls(method=method, integrand=integrand, s=s, sizes=tuple(sizes), replications=replications,
                   seed=seed, alpha=alpha, weight_spec=spec, tau=tau, base=base)

    def space_params(self) -> SpaceParams:
        base = self.base if self.method == POLYLATTICE_DIGITAL_SHIFT else None
        return SpaceParams.from_weight_spec(self.alpha, self.weight_spec, self.s, base=base)


@dataclass(frozen=True, order=True)
class ExperimentRecord:
    method: str
    size: int
    rep: int
    n_points: int
    estimate: float


@dataclass(frozen=True)
class SummaryRow:
    method: str
    size: int
    variance: float
    R: int
    mean: float = field(default=0.0, compare=False)


def parse_sizes(text: str) -> Tuple[int, ...]:
    """
    "256..16384x2" is the geometric schedule 256, 512, ..., 16384;
    anything else is a comma-separated list.
    """
    text = text.strip()
    if '..' in text:
        lo, _, rest = text.partition('..')
        hi, _, factor = rest.partition('x')
        lo, hi, factor = int(lo), int(hi), int(factor or 2)
        if lo < 1 or hi < lo or factor < 2:
            raise ValueError(f"bad size schedule {text!r}")
        sizes = []
        v = lo
        while v <= hi:
            sizes.append(v)
            v *= factor
        return tuple(sizes)
    return tuple(int(t) for t in text.split(',') if t.strip())


def mc_estimate(f, s: int, n: int, rng: RandomSource) -> float:
    """Plain Monte Carlo average at n i.i.d. uniform points."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return integrate(f, PointSet(points=rng.random((n, s))))


def randomized_lattice_estimate(f, config: ExperimentConfig, M: int, rng: RandomSource,
                                tent_transform: bool = True) -> Tuple[float, int]:
    """Fresh randomized CBC rule, one uniform shift, optionally tented; returns (estimate, N)."""
    rule, _ = construct_lattice(config.space_params(), M, config.tau, rng)
    ps = random_shift(lattice_points(rule), rng)
    if tent_transform:
        ps = tent(ps)
    return integrate(f, ps), rule.N


def poly_degree_for(size: int, b: int) -> int:
    m = round(log(size) / log(b))
    if m < 1 or b ** m != size:
        raise ValueError(f"size {size} is not a positive power of {b}")
    return m


def randomized_poly_lattice_estimate(f, config: ExperimentConfig, m: int, rng: RandomSource) -> Tuple[float, int]:
    """Fresh randomized polynomial lattice rule at finite precision plus one random digital shift."""
    b = config.base
    rule, _ = construct_poly_lattice(config.space_params(), b, m, config.tau, rng)
    d = max(m, default_digit_count(b))
    ps = digital_shift(poly_lattice_points(rule, d=d), rng, d_shift=d)
    return integrate(f, ps), rule.n_points


def sample_variance(estimates: Sequence[float]) -> float:
    """(1/(R-1)) sum_r (I_r - mean)^2."""
    R = len(estimates)
    if R < 2:
        raise ValueError(f"sample variance needs at least 2 estimates, got {R}")
    mean = fsum(estimates) / R
    return fsum((e - mean) ** 2 for e in estimates) / (R - 1)


def fit_rate(sizes: Sequence[float], variances: Sequence[float]) -> float:
    """Least-squares slope of log(variance) against log(size)."""
    if len(sizes) != len(variances):
        raise ValueError("sizes and variances differ in length")
    if len(sizes) < MIN_FIT_POINTS:
        raise ValueError(f"slope fit needs at least {MIN_FIT_POINTS} sizes, got {len(sizes)}")
    v = np.asarray(variances, dtype=np.float64)
    if np.any(v <= 0.0):
        raise ValueError("variances must be positive for a log-log fit")
    slope, _ = np.polyfit(np.log2(np.asarray(sizes, dtype=np.float64)), np.log2(v), 1)
    return float(slope)


def _run_job(config: ExperimentConfig, f, index: int, size: int, rep: int) -> ExperimentRecord:
    rng = RandomSource.for_replication(config.seed, rep, index)
    if config.method == MC:
        estimate, n_points = mc_estimate(f, config.s, size, rng), size
    elif config.method == POLYLATTICE_DIGITAL_SHIFT:
        estimate, n_points = randomized_poly_lattice_estimate(f, config, poly_degree_for(size, config.base), rng)
    else:
        estimate, n_points = randomized_lattice_estimate(f, config, size, rng,
                                                         tent_transform=config.method == LATTICE_SHIFT_TENT)
    return ExperimentRecord(method=config.method, size=size, rep=rep, n_points=int(n_points), estimate=float(estimate))


def run_experiment(config: ExperimentConfig, f: Optional[Callable] = None, threads: int = 1) -> List[ExperimentRecord]:
    """
    All (size, replication) jobs; replications use independent streams
    split from the master seed, so the output does not depend on `threads`.
    """
    f = f or INTEGRANDS[config.integrand]
    jobs = [(i, size, r) for i, size in enumerate(config.sizes) for r in range(config.replications)]
    logger.info(f"Running {len(jobs)} jobs for {config.method} on {config.integrand} with {threads} threads")
    if threads <= 1:
        records = [_run_job(config, f, *job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda job: _run_job(config, f, *job), jobs))
    records.sort(key=lambda rec: (rec.method, rec.size, rec.rep))
    return records


def summarize(records: Sequence[ExperimentRecord]) -> List[SummaryRow]:
    groups: Dict[Tuple[str, int], List[float]] = {}
    for rec in records:
        groups.setdefault((rec.method, rec.size), []).append(rec.estimate)
    return [SummaryRow(method=method, size=size, variance=sample_variance(values), R=len(values),
                       mean=fsum(values) / len(values))
            for (method, size), values in sorted(groups.items())]


def fit_rates(summary: Sequence[SummaryRow]) -> Dict[str, float]:
    """Fitted variance slope per method."""
    by_method: Dict[str, List[SummaryRow]] = {}
    for row in summary:
        by_method.setdefault(row.method, []).append(row)
    return {method: fit_rate([r.size for r in rows], [r.variance for r in rows])
            for method, rows in sorted(by_method.items())}


def records_csv(records: Sequence[ExperimentRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(['method', 'size', 'rep', 'n_points', 'estimate'])
    for rec in records:
        writer.writerow([rec.method, rec.size, rec.rep, rec.n_points, f"{rec.estimate:.17g}"])
    return out.getvalue()


def summary_csv(summary: Sequence[SummaryRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(['method', 'size', 'variance', 'R'])
    for row in summary:
        writer.writerow([row.method, row.size, f"{row.variance:.17g}", row.R])
    return out.getvalue()


def rates_dat(summary: Sequence[SummaryRow], rates: Optional[Dict[str, float]] = None) -> str:
    """gnuplot data: one block per method, columns log2(size) log2(variance)."""
    lines = []
    methods = sorted({row.method for row in summary})
    for method in methods:
        slope = (rates or {}).get(method)
        lines.append(f"# {method}" + (f" slope {slope:.6f}" if slope is not None else ''))
        for row in summary:
            if row.method == method and row.variance > 0.0:
                lines.append(f"{np.log2(row.size):.17g} {np.log2(row.variance):.17g}")
        lines.append('')
        lines.append('')
    return '\n'.join(lines)


def write_artifacts(records, summary, storage, rates: Optional[Dict[str, float]] = None) -> Dict[str, dict]:
    """records.csv, summary.csv and rates.dat through a StorageService; returns the per-file results."""
    results = {
        'records.csv': storage.save_bytes(records_csv(records).encode(), 'records.csv', 'text/csv'),
        'summary.csv': storage.save_bytes(summary_csv(summary).encode(), 'summary.csv', 'text/csv'),
        'rates.dat': storage.save_bytes(rates_dat(summary, rates).encode(), 'rates.dat', 'text/plain'),
    }
    for name, result in results.items():
        if not result.get('success'):
            logger.error(f"Failed to store {name}: {result.get('error')}")
    return results


def single_frequency_average(n_tilde: int, M: int, alpha: float, gamma1: float) -> float:
    """Average over N in P_M of |I(g_N~; lattice(N, 1))|."""
    pool = primes_in_half_open_range(M)
    if not pool:
        raise ValueError(f"P_{M} is empty")
    g = g_single_frequency(alpha, gamma1, n_tilde)
    errors = [abs(integrate(g, lattice_points(LatticeRule(N=N, z=(1,))))) for N in pool]
    return fsum(errors) / len(pool)
