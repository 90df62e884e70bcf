import math

import numpy as np
import pytest

import bowenkit as bk


def rotated_box(a, b, ang, m=60):
    """Dense boundary cloud of an a-by-b box rotated by ang."""
    t = np.linspace(0.0, 1.0, m)
    edges = [np.stack([t * a - a / 2, np.full(m, -b / 2)], axis=1),
             np.stack([t * a - a / 2, np.full(m, b / 2)], axis=1),
             np.stack([np.full(m, -a / 2), t * b - b / 2], axis=1),
             np.stack([np.full(m, a / 2), t * b - b / 2], axis=1)]
    pts = np.concatenate(edges)
    c, s = math.cos(ang), math.sin(ang)
    return pts @ np.array([[c, s], [-s, c]])


def test_enclosing_sides_exact_on_rotated_box():
    sides = bk.min_enclosing_sides(rotated_box(0.8, 0.3, 0.37)).sides
    assert sorted(sides) == pytest.approx([0.3, 0.8], abs=1e-12)


def test_enclosing_sides_1d():
    cloud = np.array([[0.1], [0.9], [0.4]])
    r = bk.min_enclosing_sides(cloud)
    assert r.sides == (pytest.approx(0.8),)
    assert r.angle is None


def test_calipers_match_brute_force_on_random_hulls():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(30):
        cloud = rng.normal(size=(rng.integers(8, 40), 2))
        cloud[:, 1] *= rng.uniform(0.2, 1.0)
        a = sorted(bk.min_enclosing_sides(cloud).sides)
        b = sorted(bk.brute_force_sides(cloud, K=4096).sides)
        worst = max(worst, abs(a[0] - b[0]), abs(a[1] - b[1]))
    assert worst <= 1e-6


def test_inscribed_identity_cube_is_exact():
    # the identity Bowen set is the eps-cube itself, at every depth
    q = bk.BowenQuery((0.5, 0.5), 8, 0.05)
    r = bk.max_inscribed_sides(bk.make_identity(dim=2), q)
    assert r.kind == "inscribed"
    assert min(r.sides) >= 0.098
    assert max(r.sides) <= 0.101


def test_inscribed_casati_avoids_needle_degeneracy():
    # Bowen sets of the skew map are thin strips at depth; the area
    # objective must keep both sides positive instead of returning the
    # longest (zero-width) diagonal segment
    cp = bk.make_casati_prosen((math.sqrt(5) - 1) / 2, math.sqrt(2) - 1)
    q = bk.BowenQuery((0.31, 0.47), 64, 0.05)
    ins = bk.max_inscribed_sides(cp, q)
    # the strip thickness at this depth is of order eps/n^2 ~ 1e-5; a
    # diagonal needle would bisect many orders of magnitude below that
    assert min(ins.sides) > 1e-5
    cloud = bk.companion_cloud(cp, q, M=60000, seed=6)
    enc = bk.min_enclosing_sides(cloud)
    area_ins = ins.sides[0] * ins.sides[1]
    area_enc = enc.sides[0] * enc.sides[1]
    assert area_ins <= area_enc * 1.05


def test_companion_cloud_doubling_shrinks_dyadically():
    q = bk.BowenQuery((0.37,), 6, 0.05)
    cl = bk.companion_cloud(bk.make_doubling(), q, M=40000, seed=2)
    assert cl.shape[1] == 1
    assert np.abs(cl[:, 0]).max() <= 0.05 * 2.0 ** -6 + 1e-12
    assert np.abs(cl[:, 0]).max() >= 0.9 * 0.05 * 2.0 ** -6


def test_exponent_series_doubling_tracks_dyadic_sides():
    es = bk.exponent_series(bk.make_doubling(), np.array([0.37]), 0.05,
                            bk.parse_gauge("identity"), list(range(1, 14, 2)),
                            M=100000, seed=4)
    dyadic = 0.1 * 2.0 ** -np.asarray(es.t, dtype=float)
    enc = np.array([r.sides[0] for r in es.enclosing])
    ins = np.array([r.sides[0] for r in es.inscribed])
    # enclosing measures the sampled cloud (a hair inside the true set);
    # inscribed probes membership directly, so it may exceed the former
    assert np.all(enc <= dyadic + 1e-12)
    assert np.all(enc / dyadic >= 0.9)
    assert ins == pytest.approx(dyadic, rel=1e-6)
    assert es.enc_ratio[-1, 0] == pytest.approx(1.0, abs=0.1)
    assert es.ins_ratio[-1, 0] == pytest.approx(1.0, abs=0.1)


def test_exponent_series_rejects_grid_below_gauge_floor():
    with pytest.raises(ValueError):
        bk.exponent_series(bk.make_doubling(), np.array([0.37]), 0.05,
                           bk.parse_gauge("log2"), [1, 2, 4], M=20000)


def test_pesin_check_doubling_frozen():
    rep = bk.pesin_check(bk.make_doubling(), np.array([0.37]), 0.05,
                         bk.parse_gauge("identity"), list(range(2, 17)),
                         M=200000, seed=31)
    assert rep.bk_slope == pytest.approx(0.912676, abs=1e-4)
    assert rep.sum_lower == pytest.approx(1.00027, abs=1e-3)
    assert rep.sum_upper == pytest.approx(1.0, abs=1e-3)
    assert rep.holds
