"""Timing comparison of the compiled kernels against their numpy twins.

Every hot kernel in bowenkit.kernels exists twice: a numba-compiled loop
(`*_jit`) and a vectorized numpy fallback (`*_np`) selected at import time
by the BOWENKIT_DISABLE_JIT environment variable.  This script times both
implementations of each pair on representative workloads and prints one
table row per kernel.  Outputs are also cross-checked for equality, so a
run doubles as a coarse twin-consistency sweep.

Usage:

    python3 benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

`--scale` shrinks every workload (0.1 gives a quick smoke run).  When the
package was imported with JIT disabled there is nothing to compare; the
script says so and exits.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

import bowenkit as bk
from bowenkit import kernels as K
from bowenkit import covering as C
from bowenkit import systems as S


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(scale):
    """(name, jit callable, np callable) triples over shared inputs."""
    rng = np.random.default_rng(2024)
    out = []

    logi = bk.make_logistic()
    n_orb = int(200000 * scale)
    out.append(("orbit1 logistic n=%d" % n_orb,
                lambda: K.orbit1_jit(logi.kind, logi.params, 0.3, n_orb),
                lambda: K.orbit1_np(logi.kind, logi.params, 0.3, n_orb)))

    db = bk.make_doubling()
    xs_m = rng.random(int(8192 * scale))
    out.append(("orbit_matrix1 doubling %dx64" % xs_m.size,
                lambda: K.orbit_matrix1_jit(db.kind, db.params, xs_m, 64),
                lambda: K.orbit_matrix1_np(db.kind, db.params, xs_m, 64)))

    n1 = 24
    corb = K.orbit1(db.kind, db.params, 0.37, n1)
    xs1 = np.mod(0.37 + 0.002 * (rng.random(int(500000 * scale)) - 0.5), 1.0)
    out.append(("sep_center_1d doubling M=%d n=%d" % (xs1.size, n1),
                lambda: K.sep_center_1d_jit(db.kind, db.params, db.wrap1,
                                            corb, xs1, 0.001, n1),
                lambda: K.sep_center_1d_np(db.kind, db.params, db.wrap1,
                                           corb, xs1, 0.001, n1)))

    cp = bk.make_casati_prosen((math.sqrt(5) - 1) / 2, math.sqrt(2) - 1)
    n2 = 512
    orb2 = K.orbit2(cp.kind, cp.params, 0.31, 0.47, n2)
    m2 = int(200000 * scale)
    xs2 = np.mod(0.31 + 0.1 * (rng.random(m2) - 0.5), 1.0)
    ys2 = np.mod(0.47 + 0.1 * (rng.random(m2) - 0.5), 1.0)
    out.append(("sep_center_2d casati M=%d n=%d" % (m2, n2),
                lambda: K.sep_center_2d_jit(cp.kind, cp.params, orb2[:, 0],
                                            orb2[:, 1], xs2, ys2, 0.05, n2),
                lambda: K.sep_center_2d_np(cp.kind, cp.params, orb2[:, 0],
                                           orb2[:, 1], xs2, ys2, 0.05, n2)))

    iet = bk.make_iet(bk.random_spec(3, 12531))
    xs_i = np.sort(rng.random(int(20000 * scale)))
    hi = np.searchsorted(xs_i, xs_i + 0.01, side="right")
    ii, jj = C._grouped_ranges(np.arange(xs_i.size, dtype=np.int64) + 1,
                               hi.astype(np.int64))
    orb_i = K.orbit_matrix1(iet.kind, iet.params, xs_i, 128)
    out.append(("septime_pairs_rows iet %d pairs" % ii.size,
                lambda: K.septime_pairs_rows_jit(orb_i, iet.wrap1, ii, jj,
                                                 0.01, 128),
                lambda: K.septime_pairs_rows_np(orb_i, iet.wrap1, ii, jj,
                                                0.01, 128)))

    sep_i = K.septime_pairs_rows(orb_i, iet.wrap1, ii, jj, 0.01, 128)
    keep = sep_i > 16
    indptr, indices, sepv = C._build_csr(xs_i.size, ii[keep], jj[keep],
                                         sep_i[keep])
    orig = np.arange(xs_i.size, dtype=np.int64)
    tgt = int(0.9 * xs_i.size)
    out.append(("greedy_cover_csr iet M=%d" % xs_i.size,
                lambda: K.greedy_cover_csr_jit(indptr, indices, sepv, 32,
                                               orig, tgt),
                lambda: K.greedy_cover_csr_np(indptr, indices, sepv, 32,
                                              orig, tgt)))

    xs_w = np.sort(rng.random(int(400000 * scale)))
    delta = 0.001 * 0.5 ** 6
    sl = np.searchsorted(xs_w, np.mod(xs_w - delta, 1.0), side="left")
    start = np.where(xs_w - delta < 0.0, sl - xs_w.size, sl).astype(np.int64)
    er = np.searchsorted(xs_w, np.mod(xs_w + delta, 1.0), side="right") - 1
    end = np.where(xs_w + delta >= 1.0, er + xs_w.size, er).astype(np.int64)
    orig_w = np.arange(xs_w.size, dtype=np.int64)
    tgt_w = int(0.9 * xs_w.size)
    out.append(("greedy_cover_windows M=%d" % xs_w.size,
                lambda: K.greedy_cover_windows_jit(start, end - start + 1,
                                                   orig_w, tgt_w, 1),
                lambda: K.greedy_cover_windows_np(start, end - start + 1,
                                                  orig_w, tgt_w, 1)))

    m_l = int(20000 * scale)
    orb_l = K.orbit1(logi.kind, logi.params, 0.51, logi.transient + m_l + 256)
    xs_l = orb_l[logi.transient + 1:]
    out.append(("lag_pairs logistic M=%d" % m_l,
                lambda: K.lag_pairs_jit(xs_l, m_l, 0.02, 8, 256),
                lambda: K.lag_pairs_np(xs_l, m_l, 0.02, 8, 256)))
    return out


def normalize(res):
    if isinstance(res, tuple):
        return tuple(np.asarray(r) for r in res)
    return (np.asarray(res),)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3,
                    help="timing repetitions, best is kept (default 3)")
    ap.add_argument("--scale", type=float, default=1.0,
                    help="workload scale factor (default 1.0)")
    args = ap.parse_args(argv)

    if not bk.JIT_ENABLED:
        print("JIT is disabled in this process (BOWENKIT_DISABLE_JIT or "
              "missing numba); both columns would time the same code. "
              "Re-run without the flag.")
        return 1

    rows = []
    for name, f_jit, f_np in workloads(args.scale):
        a = normalize(f_jit())   # first call includes compilation
        b = normalize(f_np())
        for x, y in zip(a, b):
            if not np.array_equal(x, y):
                raise AssertionError(f"twin outputs differ for {name}")
        t_jit = best_of(f_jit, args.repeat)
        t_np = best_of(f_np, args.repeat)
        rows.append((name, t_jit * 1e3, t_np * 1e3, t_np / t_jit))

    w = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{w}}  {'jit ms':>9}  {'numpy ms':>9}  {'speedup':>7}")
    for name, tj, tn, sp in rows:
        print(f"{name:<{w}}  {tj:9.2f}  {tn:9.2f}  {sp:6.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
