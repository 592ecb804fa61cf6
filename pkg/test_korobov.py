from math import pi

import numpy as np
import pytest

from korobov import (
    LatticeRule, SpaceParams, candidate_count, criterion_kernel, criterion_oracle, d_star, default_lambda_grid,
    oracle_tail_bound, r_weight, wce_bound, wce_bound_dimension_free, weight_sum, worst_case_error_sq,
)
from kernels import neumaier_sum
from numtheory import riemann_zeta


def test_space_params():
    params = SpaceParams.from_weight_spec(2.0, "poly:2", 3)
    assert params.weights == pytest.approx((1.0, 0.25, 1 / 9))
    assert SpaceParams.from_weight_spec(1.0, "const:0.5", 2).weights == (0.5, 0.5)
    assert SpaceParams.from_weight_spec(1.0, "list:0.5,0.25,0.1", 2).weights == (0.5, 0.25)
    for spec in ("list:0.5", "geom:2", "poly:x"):
        with pytest.raises(ValueError):
            SpaceParams.from_weight_spec(1.0, spec, 2)
    with pytest.raises(ValueError):
        SpaceParams(alpha=0.5, weights=(1.0,))
    with pytest.raises(ValueError):
        SpaceParams(alpha=1.0, weights=(1.5,))
    with pytest.raises(ValueError):
        LatticeRule(N=5, z=(5,))


def test_r_weight():
    params = SpaceParams(alpha=2.0, weights=(0.5, 0.25))
    assert r_weight(params, (0, 0)) == 1.0
    assert r_weight(params, (3, 0)) == pytest.approx(18.0)
    assert r_weight(params, (3, -2)) == pytest.approx(288.0)
    assert r_weight(SpaceParams(alpha=1.0, weights=(0.0,)), (1,)) == float("inf")


def test_criterion_closed_forms():
    rule = LatticeRule(N=5, z=(1,))
    assert criterion_kernel(SpaceParams(1.0, (1.0,)), rule) == pytest.approx(pi ** 2 / 75, abs=1e-12)
    assert criterion_kernel(SpaceParams(2.0, (1.0,)), rule) == pytest.approx(pi ** 4 / (45 * 625), abs=1e-12)
    assert criterion_kernel(SpaceParams(2.0, (0.0, 0.0)), LatticeRule(N=7, z=(1, 3))) == 0.0


def test_oracle_single_dimension():
    params = SpaceParams(1.0, (1.0,))
    expected = 2 * sum(1.0 / (5 * k) ** 2 for k in range(1, 11))
    assert criterion_oracle(params, LatticeRule(N=5, z=(1,)), 50) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        criterion_oracle(params, LatticeRule(N=5, z=(1,)), 4)
    with pytest.raises(ValueError):
        criterion_oracle(SpaceParams(1.0, (1.0,) * 4), LatticeRule(N=5, z=(1, 2, 3, 4)), 50)


def test_kernel_oracle_agreement():
    rs = np.random.default_rng(2024)
    for _ in range(100):
        N = int(rs.choice([5, 7, 11, 13]))
        alpha = float(rs.choice([1.0, 2.0]))
        params = SpaceParams(alpha, (1.0, float(rs.uniform(0.1, 1.0))))
        rule = LatticeRule(N=N, z=(1, int(rs.integers(1, N))))
        kernel = criterion_kernel(params, rule)
        oracle = criterion_oracle(params, rule, 200)
        assert -1e-12 <= kernel - oracle <= oracle_tail_bound(params, 200) + 1e-12


def test_generic_formula_matches_kernel():
    params = SpaceParams(2.0, (1.0, 0.5, 0.25))
    rule = LatticeRule(N=11, z=(1, 3, 5))
    n = np.arange(11)[:, None]
    points = (n * np.array(rule.z)[None, :] % 11) / 11
    assert worst_case_error_sq(params, points) == pytest.approx(criterion_kernel(params, rule), abs=1e-12)
    # shift invariance of the kernel formula
    shifted = np.mod(points + np.array([0.3, 0.7, 0.11]), 1.0)
    assert worst_case_error_sq(params, shifted) == pytest.approx(criterion_kernel(params, rule), abs=1e-10)


def test_wce_bound():
    params = SpaceParams(2.0, (1.0,))
    assert wce_bound(params, 100, 0.5, 1.0) == pytest.approx(0.04 * 2 * riemann_zeta(2.0), rel=1e-12)
    assert wce_bound(params, 200, 0.5, 1.0) == pytest.approx(wce_bound(params, 100, 0.5, 1.0) / 2, rel=1e-12)
    zero = SpaceParams(2.0, (0.0, 0.0))
    assert wce_bound(zero, 100, 0.5, 1.5) == 0.0
    with pytest.raises(ValueError):
        wce_bound(params, 100, 0.5, 2.0)
    with pytest.raises(ValueError):
        wce_bound(params, 100, 0.5, 0.4)
    with pytest.raises(ValueError):
        wce_bound(params, 100, 1.0, 1.0)
    wide = SpaceParams.from_weight_spec(2.0, "poly:2", 10)
    for lam in (0.6, 1.0, 1.5):
        assert wce_bound(wide, 1000, 0.5, lam) <= wce_bound_dimension_free(wide, 1000, 0.5, lam)
    assert weight_sum(wide, 1.0) == pytest.approx(sum(j ** -2.0 for j in range(1, 11)))


def test_d_star():
    params = SpaceParams.from_weight_spec(2.0, "poly:2", 5)
    report = d_star(params, 1000, 0.5, (1.0,))
    assert report.value == wce_bound(params, 1000, 0.5, 1.0)
    assert report.best_lambda == 1.0
    grid = default_lambda_grid(2.0)
    assert grid[0] == 0.5 and grid[-1] == pytest.approx(1.99)
    report = d_star(params, 1000, 0.5, grid)
    assert report.value == min(v for _, v in report.values)
    assert report.assumption_holds
    assert not d_star(params, 3, 0.5, (0.5,)).assumption_holds


def test_candidate_count():
    assert candidate_count(10, 0.05) == 1
    assert candidate_count(10, 0.5) == 5
    assert candidate_count(12, 0.25) == 3
    assert candidate_count(255, 0.5) == 128


def test_neumaier_sum():
    values = np.array([1.0, 1e100, 1.0, -1e100])
    assert neumaier_sum(values) == 2.0

def test_r_weight_is_multiplicative():
    params = SpaceParams(alpha=1.5, weights=(0.7, 0.3, 0.9))
    rng = np.random.default_rng(4)
    for k in rng.integers(-6, 7, size=(100, 3)):
        parts = [r_weight(SpaceParams(1.5, (g,)), (int(kj),)) for g, kj in zip(params.weights, k)]
        assert r_weight(params, tuple(int(v) for v in k)) == pytest.approx(np.prod(parts), rel=1e-12)


def test_criterion_invariant_under_reflection():
    for params in (SpaceParams(1.0, (1.0, 0.5)), SpaceParams(2.0, (0.8, 0.3))):
        for N in range(2, 14):
            for z1 in range(1, N):
                one = criterion_kernel(params, LatticeRule(N=N, z=(z1,)))
                mirrored = criterion_kernel(params, LatticeRule(N=N, z=(N - z1,)))
                assert mirrored == pytest.approx(one, rel=1e-12, abs=1e-15)
                for z2 in range(1, N):
                    both = criterion_kernel(params, LatticeRule(N=N, z=(z1, z2)))
                    for flipped in ((N - z1, z2), (z1, N - z2), (N - z1, N - z2)):
                        value = criterion_kernel(params, LatticeRule(N=N, z=flipped))
                        assert value == pytest.approx(both, rel=1e-12, abs=1e-15)


if __name__ == "__main__":
    test_space_params()
    test_r_weight()
    test_r_weight_is_multiplicative()
    test_criterion_closed_forms()
    test_criterion_invariant_under_reflection()
    test_oracle_single_dimension()
    test_kernel_oracle_agreement()
    test_generic_formula_matches_kernel()
    test_wce_bound()
    test_d_star()
    test_candidate_count()
    test_neumaier_sum()
