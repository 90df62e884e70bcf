import math
from fractions import Fraction

import numpy as np
import pytest

import bowenkit as bk
from conftest import GOLDEN


def test_rotation_step_wraps():
    rot = bk.make_rotation(0.25)
    assert bk.step(rot, np.array([0.9]))[0] == pytest.approx(0.15)
    assert bk.step(rot, np.array([0.1]))[0] == pytest.approx(0.35)


def test_rotation_fraction_records_lattice():
    rot = bk.make_rotation(Fraction(1, 3))
    assert rot.lattice == (1, 3)
    assert bk.make_rotation(0.25).lattice is None


def test_doubling_step():
    db = bk.make_doubling()
    assert bk.step(db, np.array([0.3]))[0] == pytest.approx(0.6)
    assert bk.step(db, np.array([0.7]))[0] == pytest.approx(0.4)
    orb = bk.orbit_segment(db, np.array([0.25]), 3)
    assert orb[:, 0] == pytest.approx([0.25, 0.5, 0.0, 0.0])


def test_identity_is_fixed():
    ident = bk.make_identity()
    x = np.array([0.4321])
    orb = bk.orbit_segment(ident, x, 5)
    assert np.all(orb == 0.4321)


def test_casati_prosen_step_zero_coupling():
    cp = bk.make_casati_prosen(0.0, 0.0)
    q, p = bk.step(cp, np.array([0.2, 0.3]))
    assert q == pytest.approx(0.5)
    assert p == pytest.approx(0.3)


def test_casati_prosen_momentum_kick_sign():
    # theta is -1 on the first half interval, +1 on the second
    cp = bk.make_casati_prosen(0.125, 0.0)
    _, p_lo = bk.step(cp, np.array([0.2, 0.0]))
    _, p_hi = bk.step(cp, np.array([0.7, 0.0]))
    assert p_lo == pytest.approx(0.875)
    assert p_hi == pytest.approx(0.125)


def test_iet_two_interval_swap_is_rotation():
    iet = bk.make_iet([0.5, 0.5], (2, 1))
    assert bk.step(iet, np.array([0.2]))[0] == pytest.approx(0.7)
    assert bk.step(iet, np.array([0.6]))[0] == pytest.approx(0.1)


def test_iet_accepts_spec_object():
    spec = bk.random_spec(3, 12531)
    a = bk.make_iet(spec)
    b = bk.make_iet(spec.lengths, spec.permutation)
    x = np.array([0.37])
    assert bk.step(a, x)[0] == bk.step(b, x)[0]


def test_iet_rejects_bad_input():
    with pytest.raises(ValueError):
        bk.make_iet([0.5, 0.6], (2, 1))       # lengths exceed 1
    with pytest.raises(ValueError):
        bk.make_iet([0.5, 0.5], (1, 1))       # not a permutation


def test_sup_orbit_distance_doubling_expands():
    db = bk.make_doubling()
    x = np.array([0.1])
    y = np.array([0.1 + 2.0 ** -10])
    d = bk.sup_orbit_distance(db, x, y, 3)
    assert d == pytest.approx(2.0 ** -7)
    # the early-exit form still certifies exceedance
    assert bk.sup_orbit_distance(db, x, y, 8, cutoff=2.0 ** -9) > 2.0 ** -9


def test_conjugate_square_commutes_with_chart():
    db = bk.make_doubling()
    sq = bk.conjugate_square(db)
    x = np.array([0.31])
    lhs = bk.step(sq, x ** 2)[0]
    rhs = bk.step(db, x)[0] ** 2
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert sq.measure == "pushforward_square"


def test_conjugate_rotate_commutes_with_chart():
    db = bk.make_doubling()
    rc = bk.conjugate_rotate(db, 0.25)
    x = np.array([0.31])
    lhs = bk.step(rc, (x + 0.25) % 1.0)[0]
    rhs = (bk.step(db, x)[0] + 0.25) % 1.0
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_sample_measure_deterministic():
    cp = bk.make_casati_prosen(GOLDEN, math.sqrt(2) - 1)
    a = bk.sample_measure(cp, 1000, 7)
    b = bk.sample_measure(cp, 1000, 7)
    c = bk.sample_measure(cp, 1000, 8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert a.shape == (1000, 2)


def test_logistic_sample_is_orbit_tail():
    logi = bk.make_logistic()
    s = bk.sample_measure(logi, 50, 3)
    orb = bk.empirical_orbit(logi, 50, 0, 3)
    assert np.array_equal(s[:, 0], orb[logi.transient + 1:])


def test_cut_torus_step_and_lattice():
    alpha = Fraction(4097, 65536)
    ct = bk.make_cut_torus(alpha)
    assert ct.lattice == (4097, 65536)
    # x rotates by alpha; y takes a quarter kick whose sign flips on the
    # arc [1/2 - alpha, 1/2)
    q, p = bk.step(ct, np.array([0.2, 0.3]))
    assert q == pytest.approx(0.2 + float(alpha))
    assert p == pytest.approx(0.55)
    q2, p2 = bk.step(ct, np.array([0.49, 0.3]))
    assert p2 == pytest.approx(0.05)
