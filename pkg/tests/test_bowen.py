import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bowenkit as bk
from bowenkit.bowen import LOW_COUNT_FLOOR, wilson_interval
from conftest import GOLDEN


def test_wilson_interval_frozen():
    lo, hi = wilson_interval(50, 1000)
    assert lo == pytest.approx(0.0381302623927, rel=1e-9)
    assert hi == pytest.approx(0.0653138202443, rel=1e-9)


@given(st.integers(min_value=0, max_value=500), st.integers(min_value=1000,
                                                            max_value=10 ** 6))
@settings(max_examples=200, deadline=None)
def test_wilson_interval_contains_point_estimate(k, M):
    k = min(k, M)
    lo, hi = wilson_interval(k, M)
    assert 0.0 <= lo <= k / M <= hi <= 1.0


def test_bowen_contains_doubling_window():
    db = bk.make_doubling()
    x = np.array([0.3])
    eps, n = 0.01, 5
    inside = np.array([0.3 + 0.9 * eps * 2.0 ** -n])
    outside = np.array([0.3 + 1.1 * eps * 2.0 ** -n])
    assert bk.bowen_contains(db, x, n, eps, inside)
    assert not bk.bowen_contains(db, x, n, eps, outside)


def test_bowen_query_validation():
    with pytest.raises(ValueError):
        bk.BowenQuery((0.3,), -1, 0.05)
    with pytest.raises(ValueError):
        bk.BowenQuery((0.3,), 4, 0.7)


def test_rotation_ball_mass_is_exact():
    # an isometry never separates companions, so mu-hat is the time-0 cell
    # mass with zero Monte-Carlo noise
    rot = bk.make_rotation(0.25)
    bs = bk.bk_series(rot, np.array([0.3]), 0.05, bk.parse_gauge("identity"),
                      [2, 4, 8], M=5000, seed=1)
    assert [e.value for e in bs.estimates] == [0.1, 0.1, 0.1]
    assert bs.k0 == 5000
    assert np.all(bs.ratio == 0.0)


def test_raw_ratio_matches_absolute_measure():
    rot = bk.make_rotation(0.25)
    bs = bk.bk_series(rot, np.array([0.3]), 0.05, bk.parse_gauge("identity"),
                      [2, 4, 8], M=5000, seed=1)
    want = -np.log2(0.1) / np.array([2.0, 4.0, 8.0])
    assert bs.raw_ratio() == pytest.approx(want)


def test_doubling_ball_measure_tracks_dyadic_width():
    # mu(B(n, x, eps)) = 2 eps 2^-n away from wrap interference
    db = bk.make_doubling()
    bs = bk.bk_series(db, np.array([0.3]), 0.25, bk.parse_gauge("identity"),
                      [2, 4, 6, 8], M=10 ** 6, seed=3)
    mus = np.array([e.value for e in bs.estimates])
    assert mus * 2.0 ** np.array([2, 4, 6, 8]) == pytest.approx(0.5, abs=0.02)


def test_companion_counts_nested():
    db = bk.make_doubling()
    bs = bk.bk_series(db, np.array([0.3]), 0.25, bk.parse_gauge("identity"),
                      list(range(1, 14)), M=200000, seed=5)
    ks = bs.counts()
    assert np.all(np.diff(ks) <= 0)


def test_underflow_and_low_count_flags():
    db = bk.make_doubling()
    bs = bk.bk_series(db, np.array([0.3]), 0.001, bk.parse_gauge("identity"),
                      [2, 10, 30], M=2000, seed=2)
    ks = bs.counts()
    assert ks[-1] == 0
    assert bs.censored[-1]
    assert "underflow" in bs.estimates[-1].flags[0]
    low = (ks > 0) & (ks < LOW_COUNT_FLOOR)
    for i in np.flatnonzero(low):
        assert "low_count" in bs.estimates[i].flags[0]


def test_tail_fit_skips_low_counts():
    db = bk.make_doubling()
    grid = list(range(5, 16))
    bs = bk.bk_series(db, np.array([0.3]), 0.001, bk.parse_gauge("identity"),
                      grid, M=30000, seed=2)
    fit = bs.tail_fit()
    ks = bs.counts()
    usable = int(((ks >= LOW_COUNT_FLOOR) & ~bs.censored).sum())
    assert fit.npoints <= usable
    assert fit.slope == pytest.approx(1.0, abs=0.25)


def test_local_dimension_doubling_near_one():
    db = bk.make_doubling()
    ld = bk.local_dimension(db, np.array([0.3]),
                            [2.0 ** -j for j in range(4, 12)],
                            M=500000, seed=2)
    assert ld == pytest.approx(1.0, abs=0.05)


def test_local_dimension_needs_two_decades():
    db = bk.make_doubling()
    with pytest.raises(ValueError):
        bk.local_dimension(db, np.array([0.3]), [0.1, 0.05], M=200000)


def test_bk_series_rejects_bad_grid():
    rot = bk.make_rotation(GOLDEN)
    with pytest.raises(ValueError):
        bk.bk_series(rot, np.array([0.3]), 0.05, bk.parse_gauge("identity"),
                     [4, 4, 8], M=5000)
    with pytest.raises(ValueError):
        bk.bk_series(rot, np.array([0.3]), 0.05, bk.parse_gauge("log2"),
                     [1, 2, 4], M=5000)


def test_bowen_measure_global_scheme_for_empirical():
    logi = bk.make_logistic()
    est = bk.bowen_measure(logi, np.array([0.5]), 4, 0.05, M=20000, seed=1)
    assert est.scheme == "global"
    assert 0.0 < est.value < 1.0
    assert est.ci[0] <= est.value <= est.ci[1]
