import numpy as np
import pytest

from gfpoly import GFPoly, PolyLatticeRule, enumerate_monic_irreducibles, parse_poly
from korobov import SpaceParams
from walsh import (
    DEFAULT_ORACLE_KMAX, WalshIndex, criterion_walsh_kernel, criterion_walsh_oracle, first_nonzero_indices, mu,
    r_tilde, sigma_series, sigma_table, sigma_weight, walsh_d_star, walsh_eval, walsh_oracle_tail_bound,
    walsh_wce_bound,
)

P3 = parse_poly("1,1,0,1", 2)


def test_mu():
    assert mu(0, 2) == 0
    assert mu(1, 2) == 1
    assert mu(5, 2) == 3
    assert mu(9, 3) == 3
    assert WalshIndex((5, 0), 2).mu == (3, 0)
    assert WalshIndex((5,), 2).digits == ((1, 0, 1),)


def test_r_tilde():
    assert r_tilde(SpaceParams(1.0, (1.0,), base=2), (0,)) == 1.0
    assert r_tilde(SpaceParams(1.0, (1.0,), base=2), (5,)) == pytest.approx(8.0)
    assert r_tilde(SpaceParams(2.0, (0.5,), base=2), (3,)) == pytest.approx(32.0)
    with pytest.raises(ValueError):
        r_tilde(SpaceParams(1.0, (1.0,)), (1,))


def test_walsh_eval():
    assert walsh_eval(0, 0.37, 2) == 1
    assert walsh_eval(1, 0.5, 2) == -1
    assert walsh_eval(3, 0.25, 2) == -1
    assert walsh_eval((1, 1), (0.5, 0.5), 2) == 1
    # exact digit input
    assert walsh_eval(1, [1, 0, 0], 2) == -1
    w = walsh_eval(1, 1 / 3 + 1e-3, 3)
    assert abs(w) == pytest.approx(1.0)
    assert w == pytest.approx(np.exp(2j * np.pi / 3))


def test_sigma_weight():
    assert sigma_weight(1.0, 2, None) == pytest.approx(0.5)
    assert sigma_weight(1.0, 2, 1) == pytest.approx(-0.25)
    assert sigma_weight(1.0, 2, 2) == pytest.approx(0.125)
    with pytest.raises(ValueError):
        sigma_weight(0.5, 2, 1)


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_sigma_series_identity(alpha):
    K = (1 << 14) - 1
    tail = sum(2 ** (a - 1) * 2.0 ** (-2 * alpha * a) for a in range(15, 80))
    rs = np.random.default_rng(11)
    for _ in range(50):
        digits = [int(v) for v in rs.integers(0, 2, 14)]
        if not any(digits):
            digits[-1] = 1
        r = digits.index(1) + 1
        assert sigma_series(alpha, 2, digits, K) == pytest.approx(sigma_weight(alpha, 2, r), abs=tail + 1e-12)
    assert sigma_series(alpha, 2, [0] * 14, K) == pytest.approx(sigma_weight(alpha, 2, None), abs=tail + 1e-12)


def test_first_nonzero_indices():
    rule = PolyLatticeRule(b=2, m=3, p=P3, q=(GFPoly(2, (1,)),))
    r = first_nonzero_indices(rule)
    # n = 1 is 1/p = 0.001..., n = 4 (x^2) is x^2/p = 0.1...
    assert r[0, 0] == 0
    assert r[1, 0] == 3
    assert r[4, 0] == 1


def test_criterion_walsh_matches_oracle_example():
    params = SpaceParams(1.0, (1.0,), base=2)
    rule = PolyLatticeRule(b=2, m=3, p=P3, q=(GFPoly(2, (1,)),))
    kernel = criterion_walsh_kernel(params, rule)
    oracle = criterion_walsh_oracle(params, rule, DEFAULT_ORACLE_KMAX)
    assert -1e-12 <= kernel - oracle <= walsh_oracle_tail_bound(params, 2, DEFAULT_ORACLE_KMAX) + 1e-12
    assert kernel > 0.0
    zero = SpaceParams(1.0, (0.0, 0.0), base=2)
    two = PolyLatticeRule(b=2, m=3, p=P3, q=(GFPoly(2, (1,)), GFPoly(2, (0, 1))))
    assert criterion_walsh_kernel(zero, two) == 0.0


def test_criterion_walsh_oracle_agreement():
    rs = np.random.default_rng(5)
    params = SpaceParams(1.0, (1.0, 0.5), base=2)
    tail = walsh_oracle_tail_bound(params, 2, DEFAULT_ORACLE_KMAX)
    for _ in range(50):
        m = int(rs.choice([3, 4]))
        pool = enumerate_monic_irreducibles(2, m)
        p = pool[int(rs.integers(len(pool)))]
        q2 = GFPoly.from_int(int(rs.integers(1, 2 ** m)), 2)
        rule = PolyLatticeRule(b=2, m=m, p=p, q=(GFPoly(2, (1,)), q2))
        kernel = criterion_walsh_kernel(params, rule)
        oracle = criterion_walsh_oracle(params, rule)
        assert -1e-12 <= kernel - oracle <= tail + 1e-12


def test_criterion_walsh_validation():
    params = SpaceParams(1.0, (1.0, 1.0), base=2)
    with pytest.raises(ValueError):
        criterion_walsh_kernel(params, PolyLatticeRule(b=2, m=3, p=P3, q=(GFPoly(2, (1,)), GFPoly(2))))
    with pytest.raises(ValueError):
        criterion_walsh_kernel(SpaceParams(1.0, (1.0,)), PolyLatticeRule(b=2, m=3, p=P3, q=(GFPoly(2, (1,)),)))


def test_walsh_bounds():
    params = SpaceParams(2.0, (1.0,), base=2)
    assert walsh_wce_bound(params, 2, 8, 0.5, 1.0) == pytest.approx(1 / 255, rel=1e-12)
    assert walsh_wce_bound(SpaceParams(2.0, (0.0,), base=2), 2, 8, 0.5, 1.0) == 0.0
    report = walsh_d_star(params, 2, 8, 0.5, (0.75, 1.0, 1.5))
    assert report.value == min(v for _, v in report.values)
    assert report.assumption_holds

def test_r_tilde_is_multiplicative():
    for b in (2, 3):
        params = SpaceParams(2.0, (0.7, 0.3, 0.9), base=b)
        rng = np.random.default_rng(b)
        for k in rng.integers(0, 40, size=(100, 3)):
            parts = [r_tilde(SpaceParams(2.0, (g,), base=b), (int(kj),)) for g, kj in zip(params.weights, k)]
            assert r_tilde(params, tuple(int(v) for v in k)) == pytest.approx(np.prod(parts), rel=1e-12)


def test_sigma_table():
    for alpha, b, m in ((1.0, 2, 6), (2.0, 3, 4), (1.5, 5, 3)):
        table = sigma_table(alpha, b, m)
        assert table.shape == (m + 1,)
        assert table.tolist() == [sigma_weight(alpha, b, r) for r in range(m + 1)]
    assert sigma_table(1.0, 2, 2).tolist() == pytest.approx([0.5, -0.25, 0.125])



if __name__ == "__main__":
    test_mu()
    test_r_tilde()
    test_r_tilde_is_multiplicative()
    test_walsh_eval()
    test_sigma_weight()
    test_sigma_table()
    test_sigma_series_identity(1.0)
    test_sigma_series_identity(2.0)
    test_first_nonzero_indices()
    test_criterion_walsh_matches_oracle_example()
    test_criterion_walsh_oracle_agreement()
    test_criterion_walsh_validation()
    test_walsh_bounds()
