from fractions import Fraction
from itertools import product
from math import sqrt

import numpy as np
import pytest

from cbc import RandomSource, construct_lattice
from gfpoly import GFPoly, PolyLatticeRule, digitwise_add, dual_residue_codes, enumerate_monic_irreducibles, parse_poly
from korobov import LatticeRule, SpaceParams, criterion_kernel, oracle_tail_bound
from numtheory import primes_in_half_open_range
from pointset import (
    DIGITAL_SHIFTED, SHIFTED, SHIFTED_TENTED, TENTED, TENTED_SHIFTED, PointSet, cosine_wce_oracle, digital_shift,
    dump_points, g_single_frequency, h_single_frequency, integrate, lattice_points, poly_lattice_points, random_shift,
    tent, tent_map,
)
from walsh import walsh_eval

P3 = parse_poly("1,1,0,1", 2)
ONE = GFPoly(2, (1,))


def test_lattice_points():
    ps = lattice_points(LatticeRule(N=5, z=(1, 2)))
    assert ps.points.shape == (5, 2)
    assert ps.points[3].tolist() == [3 / 5, 1 / 5]
    assert ps.points[0].tolist() == [0.0, 0.0]


def test_random_shift_and_tent():
    ps = lattice_points(LatticeRule(N=2, z=(1,)))
    shifted = random_shift(ps, RandomSource(0), delta=[0.3])
    assert shifted.points[:, 0] == pytest.approx([0.3, 0.8])
    assert np.array_equal(random_shift(ps, RandomSource(0), delta=[0.0]).points, ps.points)
    drawn = random_shift(ps, RandomSource(0))
    assert np.all((drawn.points >= 0.0) & (drawn.points < 1.0))
    assert tent_map(np.array([0.0, 0.25, 0.5, 0.75])).tolist() == [0.0, 0.5, 1.0, 0.5]
    assert tent(shifted).provenance == SHIFTED_TENTED


def test_integrate_character_property():
    for N in primes_in_half_open_range(20):
        z = np.array([1, 3 % N])
        ps = lattice_points(LatticeRule(N=N, z=tuple(int(v) for v in z)))
        for k1 in range(-N, N + 1):
            for k2 in range(-N, N + 1):
                k = np.array([k1, k2])
                value = integrate(lambda x: np.exp(2j * np.pi * (x @ k)), ps)
                expected = 1.0 if (k @ z) % N == 0 else 0.0
                assert abs(value - expected) < 1e-9
    assert integrate(lambda x: np.full(x.shape[0], 2.5), ps) == 2.5


def test_poly_points_exact():
    rule = PolyLatticeRule(b=2, m=3, p=P3, q=(ONE,))
    ps = poly_lattice_points(rule)
    assert ps.points.shape == (8, 1)
    assert ps.exact_point(1, 0).value == Fraction(23, 127)
    assert ps.points[1, 0] == pytest.approx(23 / 127, abs=1e-16)
    assert ps.points[0, 0] == 0.0
    assert ps.exact_point(1, 0).digits(7) == [0, 0, 1, 0, 1, 1, 1]
    assert ps.exact_point(1, 0).period == 7
    assert ps.exact_point(4, 0).first_nonzero_index == 1
    with pytest.raises(ValueError):
        poly_lattice_points(PolyLatticeRule(b=2, m=1, p=GFPoly(2, (0, 1)), q=(ONE,)))
    finite = poly_lattice_points(PolyLatticeRule(b=2, m=1, p=GFPoly(2, (0, 1)), q=(ONE,)), d=4)
    assert finite.points[:, 0].tolist() == [0.0, 0.5]


def test_finite_precision_tail():
    d = 30
    for m in range(2, 7):
        p = enumerate_monic_irreducibles(2, m)[0]
        q = (ONE, GFPoly.from_int(2 ** m - 1, 2))
        rule = PolyLatticeRule(b=2, m=m, p=p, q=q)
        exact = poly_lattice_points(rule)
        finite = poly_lattice_points(rule, d=d)
        assert np.all(np.abs(exact.points - finite.points) <= 2.0 ** -d)
        assert np.all(finite.points <= exact.points + 1e-16)


def test_walsh_character_property():
    p = parse_poly("1,1,0,0,1", 2)  # x^4 + x + 1
    q = (ONE, GFPoly(2, (1, 0, 1)))
    ps = poly_lattice_points(PolyLatticeRule(b=2, m=4, p=p, q=q), d=4)
    codes = [dual_residue_codes(range(16), qj, p) for qj in q]
    for k1 in range(16):
        for k2 in range(16):
            avg = np.mean([walsh_eval((k1, k2), ps.digits[n], 2).real for n in range(16)])
            dual = digitwise_add(codes[0][k1], codes[1][k2], 2, 4) == 0
            assert abs(avg - (1.0 if dual else 0.0)) < 1e-9


def test_digital_shift():
    ps = PointSet(points=np.array([[0.375]]), base=2, digits=np.array([[[0, 1, 1]]]), tail=np.zeros((1, 1)))
    shifted = digital_shift(ps, RandomSource(0), d_shift=3, shift=np.array([[1, 1, 0]]))
    assert shifted.points[0, 0] == 0.625
    assert shifted.provenance == DIGITAL_SHIFTED
    back = digital_shift(shifted, RandomSource(0), d_shift=3, shift=np.array([[1, 1, 0]]))
    assert np.array_equal(back.digits, ps.digits)
    same = digital_shift(ps, RandomSource(0), d_shift=3, shift=np.zeros((1, 3)))
    assert same.points[0, 0] == 0.375
    with pytest.raises(ValueError):
        digital_shift(ps, RandomSource(0), base=3)
    with pytest.raises(ValueError):
        digital_shift(lattice_points(LatticeRule(N=5, z=(1,))), RandomSource(0))


def test_digital_shift_exact_points():
    rule = PolyLatticeRule(b=2, m=3, p=P3, q=(ONE, GFPoly(2, (0, 1))))
    ps = poly_lattice_points(rule)
    shifted = digital_shift(ps, RandomSource(5), d_shift=60)
    assert shifted.digits.shape[-1] == 60
    assert np.all((shifted.points >= 0.0) & (shifted.points <= 1.0))
    # n = 0 is shifted to the shift itself: its first digits equal the shift digits
    assert integrate(lambda x: np.ones(x.shape[0]), shifted) == 1.0
    with pytest.raises(ValueError):
        digital_shift(ps, RandomSource(5), d_shift=2)


def test_tent_inequality():
    for N in (7, 11):
        params = SpaceParams(1.0, (1.0, 1.0))
        for seed in range(10):
            rule, _ = construct_lattice(params, N, 0.5, RandomSource(seed))
            if rule.N != N:
                continue
            tented = tent(lattice_points(rule)).points
            bound = criterion_kernel(params, rule) + oracle_tail_bound(params, 120)
            assert cosine_wce_oracle(params, tented, 120) <= bound + 1e-12


def test_single_frequency_example():
    g = g_single_frequency(2.0, 1.0, 11)
    value = integrate(g, lattice_points(LatticeRule(N=11, z=(1,))))
    assert abs(value) == pytest.approx(sqrt(2) / 121, abs=1e-12)
    h = h_single_frequency(2.0, 1.0, 11)
    ps = lattice_points(LatticeRule(N=11, z=(1, 4)))
    assert integrate(h, ps) == pytest.approx(value, abs=1e-15)


def test_dump_points():
    text = dump_points(lattice_points(LatticeRule(N=4, z=(1,))))
    assert text.splitlines() == ["0", "0.25", "0.5", "0.75"]
    rule = PolyLatticeRule(b=2, m=3, p=P3, q=(ONE,))
    exact = dump_points(poly_lattice_points(rule, d=7), exact=True)
    assert exact.splitlines()[1] == "0.0010111"
    with pytest.raises(ValueError):
        dump_points(lattice_points(LatticeRule(N=4, z=(1,))), exact=True)

def _row_codes(values, base):
    return values @ base ** np.arange(values.shape[1], dtype=np.int64)


def test_lattice_closed_under_addition():
    for N in range(2, 14):
        for s in (1, 2, 3):
            for z in product(range(1, N), repeat=s):
                ints = np.rint(lattice_points(LatticeRule(N=N, z=z)).points * N).astype(np.int64)
                codes = _row_codes(ints, N)
                sums = _row_codes((ints[:, None, :] + ints[None, :, :]).reshape(-1, s) % N, N)
                assert np.isin(sums, codes).all()


def test_poly_lattice_closed_under_digitwise_addition():
    rng = np.random.default_rng(2)
    for m in range(1, 5):
        for s in (1, 2, 3):
            for p in enumerate_monic_irreducibles(2, m):
                for _ in range(10):
                    q = tuple(GFPoly.from_int(int(c), 2) for c in rng.integers(0, 2 ** m, size=s))
                    digits = poly_lattice_points(PolyLatticeRule(b=2, m=m, p=p, q=q), d=m).digits
                    flat = digits.reshape(digits.shape[0], -1)
                    codes = _row_codes(flat, 2)
                    sums = _row_codes((flat[:, None, :] ^ flat[None, :, :]).reshape(-1, flat.shape[1]), 2)
                    assert np.isin(sums, codes).all()


def test_provenance_follows_application_order():
    ps = lattice_points(LatticeRule(N=7, z=(1, 3)))
    rng = RandomSource(1)
    assert tent(random_shift(ps, rng)).provenance == SHIFTED_TENTED
    assert random_shift(tent(ps), rng).provenance == TENTED_SHIFTED
    assert random_shift(random_shift(ps, rng), rng).provenance == SHIFTED
    assert tent(ps).provenance == TENTED



if __name__ == "__main__":
    test_lattice_points()
    test_lattice_closed_under_addition()
    test_poly_lattice_closed_under_digitwise_addition()
    test_random_shift_and_tent()
    test_provenance_follows_application_order()
    test_integrate_character_property()
    test_poly_points_exact()
    test_finite_precision_tail()
    test_walsh_character_property()
    test_digital_shift()
    test_digital_shift_exact_points()
    test_tent_inequality()
    test_single_frequency_example()
    test_dump_points()
