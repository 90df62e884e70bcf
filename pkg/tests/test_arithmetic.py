import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bowenkit as bk
from conftest import GOLDEN


def test_tower_exponents():
    assert [bk.tower_exponent(n) for n in range(3)] == [4, 16, 65536]
    assert bk.tower_exponent(3) == 2 ** 256
    with pytest.raises(ValueError):
        bk.tower_exponent(5)


def test_two_term_tower_constant_exact():
    a = bk.liouville_alpha(2)
    assert a.value == Fraction(4097, 65536)
    assert float(a) == 0.0625152587890625
    assert not a.truncated
    # distance to the full series is below twice the first dropped term
    assert a.remainder_log2 == -65535


def test_tower_constant_truncation_notice():
    a = bk.liouville_alpha(3, precision_bits=128)
    assert a.truncated
    assert a.value == Fraction(4097, 65536)
    assert "dropped" in a.notice
    b = bk.liouville_alpha(3, precision_bits=70000)
    assert b.value == Fraction(4097, 65536) + Fraction(1, 2 ** 65536)
    with pytest.raises(ValueError):
        bk.liouville_alpha(0)
    with pytest.raises(ValueError):
        bk.liouville_alpha(2, precision_bits=8)


def test_continued_fraction_of_tower_constant():
    cf = bk.continued_fraction(Fraction(4097, 65536))
    assert cf.quotients == (15, 1, 255, 16)
    assert cf.terminated
    assert cf.convergents()[-1] == Fraction(4097, 65536)


def test_continued_fraction_golden_float_all_ones():
    cf = bk.continued_fraction(GOLDEN)
    assert len(cf.quotients) >= 30
    assert set(cf.quotients) == {1}
    assert not cf.terminated


@given(st.integers(min_value=1, max_value=10 ** 9),
       st.integers(min_value=2, max_value=10 ** 9))
@settings(max_examples=200, deadline=None)
def test_continued_fraction_roundtrip(p, q):
    if p >= q:
        p = p % q
        if p == 0:
            p = 1
    x = Fraction(p, q)
    cf = bk.continued_fraction(x, depth=200)
    assert cf.terminated
    back = Fraction(0)
    for a in reversed(cf.quotients):
        back = Fraction(1, a + back)
    assert back == x


def test_type_estimate_golden_is_near_one():
    t = bk.type_estimate(GOLDEN, j_max=4096)
    assert t.nu_hat == pytest.approx(1.16192, abs=1e-4)


def test_type_estimate_tower_spike_at_16():
    a = bk.liouville_alpha(3, precision_bits=70000)
    t = bk.type_estimate(a.value, j_max=1000, j_min=2)
    assert t.arg_j == 16
    assert t.nu_hat == pytest.approx(3.0, abs=1e-9)


def test_type_estimate_clamps_exact_hits():
    t = bk.type_estimate(Fraction(1, 7), j_max=1200, j_min=2,
                         precision_bits=128)
    assert any("exact hit" in f for f in t.flags)
    assert math.isfinite(t.nu_hat)
    with pytest.raises(ValueError):
        bk.type_estimate(GOLDEN, j_max=500)


def test_entrance_curve_golden_frozen():
    ent = bk.entrance_time_curve(bk.make_rotation(GOLDEN), 0.2, 0.7,
                                 [2.0 ** -j for j in range(3, 11)], 100000)
    assert [r.tau for r in ent.records] == [1, 4, 4, 17, 17, 72, 72, 305]
    assert ent.slope == pytest.approx(1.08486, abs=1e-4)
    assert ent.max_ratio == pytest.approx(0.825267, abs=1e-4)
    taus = [r.tau for r in ent.records]
    assert taus == sorted(taus)


def test_entrance_curve_exact_lattice_frozen():
    gamma = bk.liouville_alpha(2).value
    ent = bk.entrance_time_curve(bk.make_rotation(gamma), Fraction(1, 10),
                                 Fraction(1, 2),
                                 [2.0 ** -j for j in range(3, 17)], 65536)
    assert not any(r.censored for r in ent.records)
    assert ent.slope == pytest.approx(0.622933, abs=1e-4)
    # the resonance jump of the two-term constant shows as a spike in
    # log tau / -log r well above the typical level
    assert ent.max_ratio == pytest.approx(1.54987, abs=1e-4)


def test_entrance_censors_beyond_rational_period():
    # rotation by 1/3 visits three points; a target off the orbit by more
    # than the radius can never be hit, and one period settles that
    ent = bk.entrance_time_curve(bk.make_rotation(Fraction(1, 3)),
                                 Fraction(0), Fraction(1, 2),
                                 [2.0 ** -5, 2.0 ** -6], 10 ** 6)
    assert all(r.censored and r.tau is None for r in ent.records)
    assert any("period" in f for f in ent.flags)
