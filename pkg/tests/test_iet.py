import math
from fractions import Fraction

import numpy as np
import pytest

import bowenkit as bk
from conftest import GOLDEN


def test_rotation_spec_layout():
    spec = bk.rotation_spec(Fraction(1, 4))
    assert spec.lengths == (Fraction(3, 4), Fraction(1, 4))
    assert spec.permutation == (2, 1)


def test_random_spec_frozen_and_normalized():
    spec = bk.random_spec(3, 12531)
    assert spec.permutation == (3, 2, 1)
    assert spec.lengths == pytest.approx(
        (0.240560172309, 0.474874913773, 0.284564913918), rel=1e-10)
    assert math.fsum(spec.lengths) == 1.0
    assert bk.random_spec(3, 12531).lengths == spec.lengths


def test_power_discontinuities_rotation_exact():
    # the break of rotation-by-1/5 sits at 4/5; T^n accumulates its inverse
    # images 4/5 - i/5 until they collide on the lattice
    spec = bk.rotation_spec(Fraction(1, 5))
    assert bk.power_discontinuities(spec, 1) == [Fraction(4, 5)]
    assert bk.power_discontinuities(spec, 3) == [
        Fraction(2, 5), Fraction(3, 5), Fraction(4, 5)]


def test_delta_golden_closed_form():
    # gaps of the golden rotation come from the continued fraction: at
    # n = 5 the smallest circular gap is 2 - 3*gamma
    spec = bk.rotation_spec(GOLDEN)
    assert bk.delta(spec, 5) == pytest.approx(2.0 - 3.0 * GOLDEN, abs=1e-12)


def test_delta_monotone_nonincreasing():
    spec = bk.rotation_spec(GOLDEN)
    vals = [bk.delta(spec, n) for n in range(1, 120)]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


def test_rational_rotation_collides():
    spec = bk.rotation_spec(Fraction(2, 7))
    rep = bk.property_P_scan(spec, 64)
    assert not rep.evidenced
    assert any("collision" in f for f in rep.flags)


def test_property_p_scan_golden_frozen():
    rep = bk.property_P_scan(bk.rotation_spec(GOLDEN), 4096)
    assert rep.evidenced
    assert rep.c_star == pytest.approx(0.708896, abs=1e-5)
    assert len(rep.records) == 18
    # record depths ride the Fibonacci denominators of the golden ratio
    assert [r[0] for r in rep.tail_records][-3:] == [1597, 2584, 4096]
    # the records certify delta(n) >= C*/n along the tail subsequence
    for n, d, c in rep.tail_records:
        assert d >= rep.c_star / n - 1e-12


def test_property_p_scan_seeded_iet_evidenced():
    rep = bk.property_P_scan(bk.random_spec(3, 12531), 4096)
    assert rep.evidenced
    assert rep.c_star == pytest.approx(0.0690179, abs=1e-5)


def test_approach_rate_golden_classifications():
    rot = bk.make_rotation(GOLDEN)
    Y = {"points": np.array([[0.7]])}
    up = bk.approach_rate(rot, np.array([0.2]), Y, 10 ** 5, 1.5)
    down = bk.approach_rate(rot, np.array([0.2]), Y, 10 ** 5, 0.5)
    assert up.classification == "grows"
    assert down.classification == "decays"
    assert up.last_decade_median > 10 * up.first_decade_median
    assert down.last_decade_median < 0.1 * down.first_decade_median
    # m(n) is a running minimum
    assert np.all(np.diff(up.m) <= 1e-18)


def test_iet_spec_validation():
    with pytest.raises(ValueError):
        bk.IetSpec((Fraction(1, 2), Fraction(1, 3)), (2, 1))
    with pytest.raises(ValueError):
        bk.IetSpec((0.5, 0.5), (1, 1))
