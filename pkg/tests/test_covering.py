import numpy as np
import pytest

import bowenkit as bk
from conftest import GOLDEN


def test_backend_agreement_identity_interval():
    # the interval identity map is eligible for both the sorted-window and
    # the pair-enumeration backend; greedy choices must coincide
    ident = bk.make_identity(wrap=False)
    s = bk.sample_measure(ident, 3000, 7)
    frozen = {(0.05, 0.02, 4): 12, (0.1, 0.05, 9): 6, (0.03, 0.03, 2): 19}
    for (eps, ep2, n), want in frozen.items():
        a = bk.greedy_cover(ident, s, n, eps, ep2, backend="windows")
        b = bk.greedy_cover(ident, s, n, eps, ep2, backend="enumerate")
        assert a.count == b.count == want


def test_backend_agreement_logistic_lag():
    # the lag backend exploits that an empirical sample is one orbit; the
    # generic enumeration must reproduce it point for point
    logi = bk.make_logistic()
    s = bk.sample_measure(logi, 3000, 7)
    for eps, n, want in ((0.05, 8, 8), (0.02, 16, 15)):
        a = bk.greedy_cover(logi, s, n, eps, 0.1, backend="lag")
        b = bk.greedy_cover(logi, s, n, eps, 0.1, backend="enumerate")
        assert a.count == b.count == want


def test_default_backend_choice():
    assert bk.covering_backend(bk.make_doubling()) == "windows"
    assert bk.covering_backend(bk.make_logistic()) == "lag"
    assert bk.covering_backend(bk.make_iet([0.5, 0.5], (2, 1))) == "enumerate"
    assert bk.covering_backend(bk.make_casati_prosen(0.1, 0.2)) == "enumerate"


def test_verify_cover_replays_certificate():
    db = bk.make_doubling()
    s = bk.sample_measure(db, 4000, 11)
    res = bk.greedy_cover(db, s, 6, 0.1, 0.1)
    assert bk.verify_cover(db, s, res) == res.covered_fraction
    assert res.covered_fraction >= 0.9


def test_counts_monotone_and_saturation_flagged():
    db = bk.make_doubling()
    cur = bk.complexity_curve(db, 20000, list(range(2, 15)), 0.01, 0.1,
                              bk.parse_gauge("identity"), seed=4)
    ks = cur.counts()
    assert np.all(np.diff(ks) >= 0)
    for i in range(1, ks.size):
        if ks[i] == ks[i - 1]:
            assert "saturated" in cur.results[i].flags


def test_doubling_counts_double_per_step():
    db = bk.make_doubling()
    cur = bk.complexity_curve(db, 100000, list(range(5, 11)), 0.01, 0.1,
                              bk.parse_gauge("identity"), seed=4)
    ratios = cur.counts()[1:] / cur.counts()[:-1]
    assert ratios == pytest.approx(2.0, abs=0.3)


def test_sample_limit_flag_on_small_sample():
    db = bk.make_doubling()
    cur = bk.complexity_curve(db, 1000, list(range(2, 13)), 0.01, 0.1,
                              bk.parse_gauge("identity"), seed=4)
    assert "sample_limit" in cur.results[-1].flags
    assert np.any(cur.limited())


def test_exact_cover_on_diagonal_membership():
    # each point only covers itself: the optimum is the ceiling of the target
    member = np.eye(7, dtype=bool)
    assert bk.exact_cover_count(member, 0.9) == 7
    assert bk.exact_cover_count(member, 0.5) == 4


def test_greedy_within_log_factor_of_exact():
    rng = np.random.default_rng(0)
    for trial in range(8):
        sys_ = bk.make_doubling()
        M = int(rng.integers(10, 19))
        s = bk.sample_measure(sys_, M * 50, int(rng.integers(1 << 30)))[:M]
        eps = float(rng.uniform(0.05, 0.22))
        n = int(rng.integers(1, 5))
        greedy = bk.greedy_cover(sys_, s, n, eps, 0.1).count
        member = bk.membership_matrix(sys_, s, n, eps)
        exact = bk.exact_cover_count(member, 0.9)
        assert exact <= greedy <= max(exact, int(exact * (1 + np.log(M))))


def test_curve_validation():
    db = bk.make_doubling()
    with pytest.raises(ValueError):
        bk.complexity_curve(db, 5000, [4, 4, 8], 0.01, 0.1,
                            bk.parse_gauge("identity"))
    with pytest.raises(ValueError):
        bk.complexity_curve(db, 5000, [1, 2, 4], 0.01, 0.1,
                            bk.parse_gauge("log2"))
    with pytest.raises(ValueError):
        bk.greedy_cover(db, np.zeros((10, 2)), 3, 0.05, 0.1)


def test_windows_backend_rejects_wide_doubling_radius():
    db = bk.make_doubling()
    s = bk.sample_measure(db, 2000, 3)
    with pytest.raises(ValueError):
        bk.greedy_cover(db, s, 4, 0.3, 0.1, backend="windows")


def test_membership_matrix_symmetric_with_true_diagonal():
    rot = bk.make_rotation(GOLDEN)
    s = bk.sample_measure(rot, 20, 5)
    member = bk.membership_matrix(rot, s, 6, 0.07)
    assert member.dtype == bool
    assert np.array_equal(member, member.T)
    assert np.all(np.diag(member))
