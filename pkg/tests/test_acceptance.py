"""Acceptance suite: eleven end-to-end checks at pinned tolerances.

Each test drives either a bundled experiment config through the runner or
the library API at the bundled parameters, measures the advertised
quantity, and prints one summary line.  Tolerances are part of the
contract; loosening one here is a behavior change, not a test fix.
"""

import math

import numpy as np
import pytest

import bowenkit as bk
from conftest import GOLDEN, config_path, flag_value, read_results, row_flags

W = 8


@pytest.fixture(scope="module")
def runner(tmp_path_factory):
    cache = {}

    def run(name, workers=1):
        key = (name, workers)
        if key not in cache:
            out = tmp_path_factory.mktemp(f"{name}_w{workers}")
            bk.run_config(config_path(name + ".cfg"), out, workers=workers)
            cache[key] = out
        return cache[key]

    return run


def report(num, ok, detail):
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {num}: {detail}"


def first_flag(rows, key):
    for r in rows:
        for f in row_flags(r):
            if f.startswith(key + "="):
                return float(f.split("=", 1)[1])
    raise KeyError(key)


def all_flag_values(rows, key):
    out = []
    for r in rows:
        for f in row_flags(r):
            if f.startswith(key + "="):
                out.append(float(f.split("=", 1)[1]))
    return out


def test_criterion_01_calibration_positive_entropy(runner):
    _, bk_rows = read_results(runner("calibration_doubling_bk") /
                              "results.csv")
    _, cv_rows = read_results(runner("calibration_doubling_curve") /
                              "results.csv")
    s_bk = first_flag(bk_rows, "tail_slope")
    s_cv = first_flag(cv_rows, "tail_slope")
    ok = abs(s_bk - 1.0) <= 0.10 and abs(s_cv - 1.0) <= 0.15
    report(1, ok, f"bk_slope={s_bk:.5g} (1.00+-0.10) "
                  f"curve_slope={s_cv:.5g} (1.0+-0.15)")


def test_criterion_02_calibration_zero_complexity(runner):
    worst = 0.0
    for name in ("zero_rotation_bk", "zero_identity_bk"):
        _, rows = read_results(runner(name) / "results.csv")
        vals = [abs(float(r["ratio_bits"])) for r in rows if r["ratio_bits"]]
        worst = max(worst, max(vals))
    counts = {}
    for name in ("zero_rotation_curve", "zero_identity_curve"):
        _, rows = read_results(runner(name) / "results.csv")
        counts[name] = sorted({int(float(r["N_hat or mu_hat"]))
                               for r in rows})
    constant = all(len(v) == 1 for v in counts.values())
    ok = worst <= 0.05 and constant
    report(2, ok, f"max|r(n)|={worst:.3g} (<=0.05) "
                  f"N_hat constant={constant} {counts}")


def test_criterion_03_iet_log_complexity(runner):
    cfg = bk.parse_config(config_path("iet_curve.cfg"))
    sys_ = cfg.build_system()
    want = (0.2398, 0.4721, 0.2880)
    len_ok = all(abs(a - b) <= 0.005
                 for a, b in zip(sys_.extra["lengths"], want))
    _, ps_rows = read_results(runner("iet_pscan") / "results.csv")
    c_star = first_flag(ps_rows, "c_star")
    evidenced = not any("not evidenced" in r["flags"] for r in ps_rows)
    cur = bk.complexity_curve(sys_, cfg.M, cfg.n_grid, cfg.epsilon[0],
                              cfg.eps_prime, bk.parse_gauge(cfg.gauges[0]),
                              seed=cfg.seed)
    fit = cur.tail_fit(W)
    ok = (len_ok and evidenced and c_star >= 0.01
          and 0.7 <= fit.slope <= 1.3 and fit.r2 >= 0.9)
    report(3, ok, f"lengths_ok={len_ok} C*={c_star:.4g} (>=0.01) "
                  f"slope={fit.slope:.5g} ([0.7,1.3]) R2={fit.r2:.4g} (>=0.9)")


def test_criterion_04_casati_prosen_bounded_slope(runner):
    _, rows = read_results(runner("casati_bk") / "results.csv")
    slopes = all_flag_values(rows, "tail_slope")
    assert len(slopes) == 2
    ok = all(0.5 <= s <= 3.5 for s in slopes)
    report(4, ok, "eps=0.05 slope=%.5g, eps=0.02 slope=%.5g ([0.5,3.5])"
           % tuple(slopes))


def test_criterion_05_feigenbaum_trivial_complexity(runner):
    _, rows = read_results(runner("feigenbaum_curve") / "results.csv")
    by_eps = {}
    for r in rows:
        by_eps.setdefault(r["epsilon"], {})[int(r["n"])] = \
            int(float(r["N_hat or mu_hat"]))
    ok = True
    parts = []
    for eps, d in sorted(by_eps.items(), key=lambda kv: -float(kv[0])):
        same = d[1024] == d[16384]
        ok = ok and same
        parts.append(f"eps={eps}: N(2^10)={d[1024]} N(2^14)={d[16384]}")
    report(5, ok, "; ".join(parts))


def test_criterion_06_torus_limsup_liminf_gap(runner):
    _, rows = read_results(runner("torus_gap") / "results.csv")
    per = {}
    for r in rows:
        start = next(f for f in row_flags(r) if f.startswith("start="))
        if r["ratio_bits"]:
            per.setdefault(start, {})[int(r["n"])] = float(r["ratio_bits"])
    window = [n for n in sorted(next(iter(per.values())))
              if 1000 <= n <= 100000 and not 30000 <= n <= 100000]
    ends = [d[65536] for d in per.values()]
    mins = [min(d[n] for n in window) for d in per.values()]
    med_end = float(np.median(ends))
    med_min = float(np.median(mins))
    ok = med_end >= 0.7 and med_min <= 0.3 and len(per) == 20
    report(6, ok, f"median r(65536)={med_end:.4g} (>=0.7) "
                  f"median min r={med_min:.4g} (<=0.3) starts={len(per)}")


def test_criterion_07_sandwich_and_invariance(runner):
    gid = bk.parse_gauge("identity")
    geo = list(bk.n_grid_geometric(2, 256))
    nlin = list(range(5, 16))
    logn = [1024, 2048, 4096, 8192, 16384]
    cases = [
        ("rotation", bk.make_rotation(GOLDEN), 0.05, geo, geo,
         50000, 20000, 13, 5),
        ("doubling", bk.make_doubling(), 0.2, nlin, nlin,
         10 ** 6, 10 ** 6, 3, 42),
        ("identity", bk.make_identity(), 0.05, geo, geo,
         50000, 20000, 13, 5),
        ("logistic", bk.make_logistic(), 0.02, logn, logn,
         20000, 20000, 7, 5),
    ]
    sandwich_ok = True
    details = []
    for name, sys_, eps, nbk, ncv, m_bk, m_cv, s_bk, s_cv in cases:
        series = bk.bk_series(sys_, bk.sample_measure(sys_, 1, s_bk)[0], eps,
                              gid, nbk, M=m_bk, seed=s_bk + 1)
        raw = series.raw_ratio()
        use = ~series.censored & (series.counts() >= 8) & np.isfinite(raw)
        vals = raw[use][-W:]
        hhat = bk.complexity_curve(sys_, m_cv, ncv, eps, 0.1, gid,
                                   seed=s_cv).tail_fit(W).slope
        good = vals.min() - 0.2 <= hhat <= vals.max() + 0.2
        sandwich_ok = sandwich_ok and good
        details.append(f"{name}:{'ok' if good else 'VIOLATED'}")

    # slope at x versus at Tx (pointwise invariance proxy)
    inv_ok = True
    for sys_, eps, grid, gauge in (
            (bk.make_doubling(), 0.05, nlin, gid),
            (bk.make_iet(bk.random_spec(3, 12531)), 0.01,
             list(bk.n_grid_geometric(64, 4096)), bk.parse_gauge("log2"))):
        x = bk.sample_measure(sys_, 1, 9)[0]
        s1 = bk.bk_series(sys_, x, eps, gauge, grid, M=200000,
                          seed=17).tail_fit(W).slope
        s2 = bk.bk_series(sys_, bk.step(sys_, x), eps, gauge, grid, M=200000,
                          seed=17).tail_fit(W).slope
        inv_ok = inv_ok and abs(s1 - s2) <= 0.1

    _, rows = read_results(runner("conjugacy_doubling") / "results.csv")
    slopes = all_flag_values(rows, "tail_slope")
    conj_diff = abs(slopes[0] - slopes[1])
    ok = sandwich_ok and inv_ok and conj_diff <= 0.2
    report(7, ok, f"sandwich[{' '.join(details)}] invariance_ok={inv_ok} "
                  f"conjugacy_diff={conj_diff:.4g} (<=0.2)")


def test_criterion_08_oracle_equivalences():
    rng = np.random.default_rng(12)
    makers = (bk.make_doubling, lambda: bk.make_rotation(GOLDEN),
              bk.make_identity)
    cover_ok = nested_ok = True
    for trial in range(50):
        sys_ = makers[trial % 3]()
        M = int(rng.integers(10, 21))
        s = bk.sample_measure(sys_, 200, int(rng.integers(1 << 30)))[:M]
        eps = float(rng.uniform(0.05, 0.22))
        n = int(rng.integers(1, 5))
        greedy = bk.greedy_cover(sys_, s, n, eps, 0.1).count
        exact = bk.exact_cover_count(bk.membership_matrix(sys_, s, n, eps),
                                     0.9)
        exact2 = bk.exact_cover_count(
            bk.membership_matrix(sys_, s, n + 2, eps), 0.9)
        cover_ok &= exact <= greedy <= max(exact,
                                           int(exact * (1 + math.log(M))))
        nested_ok &= exact2 >= exact
    worst = 0.0
    for k in range(100):
        r = np.random.default_rng(100 + k)
        cloud = r.normal(size=(int(r.integers(8, 40)), 2))
        cloud[:, 1] *= r.uniform(0.2, 1.0)
        a = sorted(bk.min_enclosing_sides(cloud).sides)
        b = sorted(bk.brute_force_sides(cloud, K=4096).sides)
        worst = max(worst, abs(a[0] - b[0]), abs(a[1] - b[1]))
    ok = cover_ok and nested_ok and worst <= 1e-6
    report(8, ok, f"greedy_in_band={cover_ok} nested={nested_ok} "
                  f"calipers_vs_brute={worst:.3g} (<=1e-6)")


def test_criterion_09_approach_rates():
    rot = bk.make_rotation(GOLDEN)
    Y = {"points": np.array([[0.7]])}
    up = bk.approach_rate(rot, np.array([0.2]), Y, 10 ** 6, 1.5)
    down = bk.approach_rate(rot, np.array([0.2]), Y, 10 ** 6, 0.5)
    ok = (up.last_decade_median >= 10 * up.first_decade_median
          and down.last_decade_median <= 0.1 * down.first_decade_median)
    report(9, ok, "alpha=1.5: %.3g -> %.3g (grows); "
                  "alpha=0.5: %.3g -> %.3g (decays)"
           % (up.first_decade_median, up.last_decade_median,
              down.first_decade_median, down.last_decade_median))


def test_criterion_10_side_exponent_inequality(runner):
    parts = []
    ok = True
    for name in ("pesin_doubling", "pesin_casati"):
        _, rows = read_results(runner(name) / "results.csv")
        slope = first_flag(rows, "bk_slope")
        lo = first_flag(rows, "sum_lower")
        hi = first_flag(rows, "sum_upper")
        held = (hi + 0.5 >= slope >= lo - 0.5) and \
            any("holds" in r["flags"] for r in rows)
        ok = ok and held
        parts.append(f"{name}: {lo:.4g}-0.5 <= {slope:.4g} <= {hi:.4g}+0.5")
    report(10, ok, "; ".join(parts))


def test_criterion_11_worker_determinism(runner):
    ok = True
    parts = []
    for name in ("iet_curve", "zero_rotation_bk"):
        a = runner(name, workers=1)
        b = runner(name, workers=8)
        same_csv = (a / "results.csv").read_bytes() == \
            (b / "results.csv").read_bytes()
        same_svg = (a / "ratios.svg").read_bytes() == \
            (b / "ratios.svg").read_bytes()
        ok = ok and same_csv and same_svg
        parts.append(f"{name}: csv={same_csv} svg={same_svg}")
    report(11, ok, "workers 1 vs 8 byte-identical; " + "; ".join(parts))
