"""Low-level numerical kernels.

Two implementations live side by side for every hot loop:

* a scalar version decorated with :func:`bowenkit._accel.njit` (compiled when
  numba is available and enabled), suffix ``_jit``;
* a vectorized numpy twin, suffix ``_np``.

Both perform the same IEEE-754 operations in the same per-element order, so
their outputs are bit-identical; tests assert this.  The undecorated facades
(no suffix) pick the compiled path when it is enabled and the numpy path
otherwise.

Map rules are encoded as an integer ``kind`` plus a flat float64 parameter
vector so that one kernel serves every built-in system.  Parameter layouts:

=================  ============================================================
kind               params
=================  ============================================================
KIND_IDENTITY      ()
KIND_ROTATION      (gamma,)
KIND_DOUBLING      ()
KIND_LOGISTIC      (lam,)
KIND_IET           (m, b_0..b_m, t_0..t_{m-1})   breakpoints then translations
KIND_CASATI_PROSEN (alpha, beta, factorized)
KIND_CUT_TORUS     (alpha, cut_lo, cut_hi)       theta=-1/4 on [cut_lo,cut_hi)
KIND_PW_ISOMETRY   (n_atoms, {nv, cos, sin, tx, ty, v0x, v0y, ...} per atom)
KIND_CONJ_SQUARE   (0, inner_kind, inner params...)    phi(x) = x^2
KIND_CONJ_ROTATE   (c, inner_kind, inner params...)    phi(x) = x + c mod 1
=================  ============================================================

All 2-d built-ins act on the torus (both coordinates wrap).  1-d systems carry
an explicit wrap flag (1 = circle metric, 0 = interval metric).
"""

from __future__ import annotations

import numpy as np

from ._accel import JIT_ENABLED, njit, prange

KIND_IDENTITY = 0
KIND_ROTATION = 1
KIND_DOUBLING = 2
KIND_LOGISTIC = 3
KIND_IET = 4
KIND_CASATI_PROSEN = 5
KIND_CUT_TORUS = 6
KIND_PW_ISOMETRY = 7
KIND_CONJ_SQUARE = 8
KIND_CONJ_ROTATE = 9

KINDS_1D = (KIND_IDENTITY, KIND_ROTATION, KIND_DOUBLING, KIND_LOGISTIC,
            KIND_IET, KIND_CONJ_SQUARE, KIND_CONJ_ROTATE)
KINDS_2D = (KIND_CASATI_PROSEN, KIND_CUT_TORUS, KIND_PW_ISOMETRY)

# 1-d kinds whose step is a global isometry for the matching metric: orbit
# distances are constant in time, so separation never happens once the
# time-0 distance is within epsilon.
ISOMETRY_KINDS_1D = (KIND_IDENTITY, KIND_ROTATION)


# ---------------------------------------------------------------------------
# scalar steps and distances (jit path)
# ---------------------------------------------------------------------------

@njit
def _step1_base(kind, params, off, x):
    if kind == KIND_IDENTITY:
        return x
    elif kind == KIND_ROTATION:
        return (x + params[off]) % 1.0
    elif kind == KIND_DOUBLING:
        return (2.0 * x) % 1.0
    elif kind == KIND_LOGISTIC:
        lam = params[off]
        return lam * x * (1.0 - x)
    elif kind == KIND_IET:
        m = int(params[off])
        for i in range(m - 1):
            if x < params[off + 2 + i]:
                return (x + params[off + m + 2 + i]) % 1.0
        return (x + params[off + 2 * m + 1]) % 1.0
    return x


@njit
def step1_jit(kind, params, x):
    if kind == KIND_CONJ_SQUARE:
        u = np.sqrt(x)
        v = _step1_base(int(params[1]), params, 2, u)
        return v * v
    elif kind == KIND_CONJ_ROTATE:
        u = (x - params[0]) % 1.0
        v = _step1_base(int(params[1]), params, 2, u)
        return (v + params[0]) % 1.0
    return _step1_base(kind, params, 0, x)


@njit
def _point_in_poly(params, off, nv, x, y):
    inside = False
    j = nv - 1
    for i in range(nv):
        xi = params[off + 2 * i]
        yi = params[off + 2 * i + 1]
        xj = params[off + 2 * j]
        yj = params[off + 2 * j + 1]
        if (yi > y) != (yj > y):
            xint = (xj - xi) * (y - yi) / (yj - yi) + xi
            if x < xint:
                inside = not inside
        j = i
    return inside


@njit
def step2_jit(kind, params, x, y):
    if kind == KIND_CASATI_PROSEN:
        alpha = params[0]
        beta = params[1]
        th = -1.0 if x < 0.5 else 1.0
        if params[2] != 0.0:
            yn = (y + alpha * th) % 1.0
            xn = (x + yn + beta) % 1.0
        else:
            xn = (x + y + beta) % 1.0
            yn = (y + alpha * th) % 1.0
        return xn, yn
    elif kind == KIND_CUT_TORUS:
        alpha = params[0]
        lo = params[1]
        hi = params[2]
        if lo <= hi:
            neg = (x >= lo) and (x < hi)
        else:
            neg = (x >= lo) or (x < hi)
        th = -0.25 if neg else 0.25
        yn = (y + th) % 1.0
        xn = (x + alpha) % 1.0
        return xn, yn
    elif kind == KIND_PW_ISOMETRY:
        na = int(params[0])
        off = 1
        for a in range(na):
            nv = int(params[off])
            if _point_in_poly(params, off + 5, nv, x, y):
                c = params[off + 1]
                s = params[off + 2]
                tx = params[off + 3]
                ty = params[off + 4]
                xn = (c * x - s * y + tx) % 1.0
                yn = (s * x + c * y + ty) % 1.0
                return xn, yn
            off += 5 + 2 * nv
        return x, y
    return x, y


@njit
def circ_dist_jit(a, b):
    d = (a - b) % 1.0
    if d > 0.5:
        d = 1.0 - d
    return d


@njit
def dist1_jit(wrap, a, b):
    if wrap == 1:
        return circ_dist_jit(a, b)
    return abs(a - b)


@njit
def dist2_jit(x1, y1, x2, y2):
    dx = circ_dist_jit(x1, x2)
    dy = circ_dist_jit(y1, y2)
    return dx if dx >= dy else dy


# ---------------------------------------------------------------------------
# vectorized steps and distances (numpy path)
# ---------------------------------------------------------------------------

def step1_np(kind, params, x):
    """Vectorized twin of step1_jit; x is a float64 ndarray."""
    kind = int(kind)
    if kind == KIND_CONJ_SQUARE:
        u = np.sqrt(x)
        v = _step1_base_np(int(params[1]), params, 2, u)
        return v * v
    if kind == KIND_CONJ_ROTATE:
        u = (x - params[0]) % 1.0
        v = _step1_base_np(int(params[1]), params, 2, u)
        return (v + params[0]) % 1.0
    return _step1_base_np(kind, params, 0, x)


def _step1_base_np(kind, params, off, x):
    if kind == KIND_IDENTITY:
        return x.copy()
    if kind == KIND_ROTATION:
        return (x + params[off]) % 1.0
    if kind == KIND_DOUBLING:
        return (2.0 * x) % 1.0
    if kind == KIND_LOGISTIC:
        lam = params[off]
        return lam * x * (1.0 - x)
    if kind == KIND_IET:
        m = int(params[off])
        breaks = params[off + 1:off + m + 2]
        trans = params[off + m + 2:off + 2 * m + 2]
        idx = np.searchsorted(breaks, x, side="right") - 1
        idx = np.clip(idx, 0, m - 1)
        return (x + trans[idx]) % 1.0
    return x.copy()


def step2_np(kind, params, x, y):
    kind = int(kind)
    if kind == KIND_CASATI_PROSEN:
        alpha, beta, fact = params[0], params[1], params[2]
        th = np.where(x < 0.5, -1.0, 1.0)
        if fact != 0.0:
            yn = (y + alpha * th) % 1.0
            xn = (x + yn + beta) % 1.0
        else:
            xn = (x + y + beta) % 1.0
            yn = (y + alpha * th) % 1.0
        return xn, yn
    if kind == KIND_CUT_TORUS:
        alpha, lo, hi = params[0], params[1], params[2]
        if lo <= hi:
            neg = (x >= lo) & (x < hi)
        else:
            neg = (x >= lo) | (x < hi)
        th = np.where(neg, -0.25, 0.25)
        yn = (y + th) % 1.0
        xn = (x + alpha) % 1.0
        return xn, yn
    if kind == KIND_PW_ISOMETRY:
        xn = np.empty_like(x)
        yn = np.empty_like(y)
        for i in range(x.shape[0]):
            xn[i], yn[i] = step2_jit(kind, params, x[i], y[i])
        return xn, yn
    return x.copy(), y.copy()


def circ_dist_np(a, b):
    d = (a - b) % 1.0
    return np.where(d > 0.5, 1.0 - d, d)


def dist1_np(wrap, a, b):
    if wrap == 1:
        return circ_dist_np(a, b)
    return np.abs(a - b)


def dist2_np(x1, y1, x2, y2):
    return np.maximum(circ_dist_np(x1, x2), circ_dist_np(y1, y2))


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

@njit
def orbit1_jit(kind, params, x0, n):
    out = np.empty(n + 1, dtype=np.float64)
    x = x0
    out[0] = x
    for t in range(n):
        x = step1_jit(kind, params, x)
        out[t + 1] = x
    return out


@njit
def orbit2_jit(kind, params, x0, y0, n):
    out = np.empty((n + 1, 2), dtype=np.float64)
    x = x0
    y = y0
    out[0, 0] = x
    out[0, 1] = y
    for t in range(n):
        x, y = step2_jit(kind, params, x, y)
        out[t + 1, 0] = x
        out[t + 1, 1] = y
    return out


def orbit1_np(kind, params, x0, n):
    out = np.empty(n + 1, dtype=np.float64)
    xa = np.array([x0], dtype=np.float64)
    out[0] = xa[0]
    for t in range(n):
        xa = step1_np(kind, params, xa)
        out[t + 1] = xa[0]
    return out


def orbit2_np(kind, params, x0, y0, n):
    out = np.empty((n + 1, 2), dtype=np.float64)
    xa = np.array([x0], dtype=np.float64)
    ya = np.array([y0], dtype=np.float64)
    out[0, 0] = xa[0]
    out[0, 1] = ya[0]
    for t in range(n):
        xa, ya = step2_np(kind, params, xa, ya)
        out[t + 1, 0] = xa[0]
        out[t + 1, 1] = ya[0]
    return out


@njit(parallel=True)
def orbit_matrix1_jit(kind, params, xs0, n):
    M = xs0.shape[0]
    out = np.empty((M, n + 1), dtype=np.float64)
    for s in prange(M):
        x = xs0[s]
        out[s, 0] = x
        for t in range(n):
            x = step1_jit(kind, params, x)
            out[s, t + 1] = x
    return out


def orbit_matrix1_np(kind, params, xs0, n):
    M = xs0.shape[0]
    out = np.empty((M, n + 1), dtype=np.float64)
    cur = xs0.copy()
    out[:, 0] = cur
    for t in range(n):
        cur = step1_np(kind, params, cur)
        out[:, t + 1] = cur
    return out


def orbit1(kind, params, x0, n):
    if JIT_ENABLED:
        return orbit1_jit(kind, params, float(x0), int(n))
    return orbit1_np(kind, params, float(x0), int(n))


def orbit2(kind, params, x0, y0, n):
    if JIT_ENABLED:
        return orbit2_jit(kind, params, float(x0), float(y0), int(n))
    return orbit2_np(kind, params, float(x0), float(y0), int(n))


def orbit_matrix1(kind, params, xs0, n):
    if JIT_ENABLED:
        return orbit_matrix1_jit(kind, params, xs0, int(n))
    return orbit_matrix1_np(kind, params, xs0, int(n))


# ---------------------------------------------------------------------------
# separation times against a fixed center orbit
#
# sep[s] is the first time t with d(T^t(sample_s), T^t(center)) > eps, or
# n_max + 1 when the sample stays within eps through time n_max.  A sample is
# a companion at level n  iff  sep[s] > n.
# ---------------------------------------------------------------------------

@njit(parallel=True)
def sep_center_1d_jit(kind, params, wrap, corb, xs0, eps, n_max):
    M = xs0.shape[0]
    out = np.empty(M, dtype=np.int64)
    for s in prange(M):
        x = xs0[s]
        sep = n_max + 1
        for t in range(n_max + 1):
            if dist1_jit(wrap, x, corb[t]) > eps:
                sep = t
                break
            if t < n_max:
                x = step1_jit(kind, params, x)
        out[s] = sep
    return out


def sep_center_1d_np(kind, params, wrap, corb, xs0, eps, n_max):
    M = xs0.shape[0]
    out = np.full(M, n_max + 1, dtype=np.int64)
    idx = np.arange(M)
    x = xs0.copy()
    for t in range(n_max + 1):
        gone = dist1_np(wrap, x, corb[t]) > eps
        if gone.any():
            out[idx[gone]] = t
            keep = ~gone
            idx = idx[keep]
            x = x[keep]
            if idx.size == 0:
                break
        if t < n_max:
            x = step1_np(kind, params, x)
    return out


@njit(parallel=True)
def sep_center_2d_jit(kind, params, corbx, corby, xs0, ys0, eps, n_max):
    M = xs0.shape[0]
    out = np.empty(M, dtype=np.int64)
    for s in prange(M):
        x = xs0[s]
        y = ys0[s]
        sep = n_max + 1
        for t in range(n_max + 1):
            if dist2_jit(x, y, corbx[t], corby[t]) > eps:
                sep = t
                break
            if t < n_max:
                x, y = step2_jit(kind, params, x, y)
        out[s] = sep
    return out


def sep_center_2d_np(kind, params, corbx, corby, xs0, ys0, eps, n_max):
    M = xs0.shape[0]
    out = np.full(M, n_max + 1, dtype=np.int64)
    idx = np.arange(M)
    x = xs0.copy()
    y = ys0.copy()
    for t in range(n_max + 1):
        gone = dist2_np(x, y, corbx[t], corby[t]) > eps
        if gone.any():
            out[idx[gone]] = t
            keep = ~gone
            idx = idx[keep]
            x = x[keep]
            y = y[keep]
            if idx.size == 0:
                break
        if t < n_max:
            x, y = step2_np(kind, params, x, y)
    return out


def sep_center_1d(kind, params, wrap, corb, xs0, eps, n_max):
    if JIT_ENABLED:
        return sep_center_1d_jit(kind, params, wrap, corb, xs0, eps, int(n_max))
    return sep_center_1d_np(kind, params, wrap, corb, xs0, eps, int(n_max))


def sep_center_2d(kind, params, corbx, corby, xs0, ys0, eps, n_max):
    if JIT_ENABLED:
        return sep_center_2d_jit(kind, params, corbx, corby, xs0, ys0, eps,
                                 int(n_max))
    return sep_center_2d_np(kind, params, corbx, corby, xs0, ys0, eps,
                            int(n_max))


# ---------------------------------------------------------------------------
# cut-torus lattice separation (rational rotation number a/q)
#
# For the torus map x -> x + a/q, y -> y + theta(x) the x offsets of an orbit
# live on the exact lattice x0 + (t*a mod q)/q, and the y coordinates of two
# orbits started within eps (< 1/4) of each other stay within eps exactly
# until the first time their theta branches disagree, at which point the y
# distance jumps to 1/2 - O(eps).  Separation times therefore follow from
# branch bookkeeping alone; no y arithmetic and no accumulated float error.
# ---------------------------------------------------------------------------

def _center_branches(x0c, a, q, lo, hi, n_steps):
    t = np.arange(n_steps, dtype=np.int64)
    xt = (x0c + ((t * a) % q) / float(q)) % 1.0
    return ((xt >= lo) & (xt < hi)).astype(np.uint8)


@njit(parallel=True)
def sep_cut_lattice_jit(x0c, xs0, a, q, lo, hi, n_steps):
    qf = float(q)
    cbr = np.empty(n_steps, dtype=np.uint8)
    mm = np.int64(0)
    for t in range(n_steps):
        xt = (x0c + mm / qf) % 1.0
        cbr[t] = 1 if (xt >= lo) and (xt < hi) else 0
        mm += a
        if mm >= q:
            mm -= q
    M = xs0.shape[0]
    out = np.empty(M, dtype=np.int64)
    for s in prange(M):
        x = xs0[s]
        sep = n_steps + 1
        mm2 = np.int64(0)
        for t in range(n_steps):
            xt = (x + mm2 / qf) % 1.0
            br = 1 if (xt >= lo) and (xt < hi) else 0
            if br != cbr[t]:
                sep = t + 1
                break
            mm2 += a
            if mm2 >= q:
                mm2 -= q
        out[s] = sep
    return out


def sep_cut_lattice_np(x0c, xs0, a, q, lo, hi, n_steps):
    cbr = _center_branches(x0c, a, q, lo, hi, n_steps)
    M = xs0.shape[0]
    out = np.full(M, n_steps + 1, dtype=np.int64)
    idx = np.arange(M)
    x = xs0.copy()
    qf = float(q)
    mm = 0
    for t in range(n_steps):
        xt = (x + mm / qf) % 1.0
        br = (xt >= lo) & (xt < hi)
        gone = br != (cbr[t] == 1)
        if gone.any():
            out[idx[gone]] = t + 1
            keep = ~gone
            idx = idx[keep]
            x = x[keep]
            if idx.size == 0:
                break
        mm += a
        if mm >= q:
            mm -= q
    return out


def sep_cut_lattice(x0c, xs0, a, q, lo, hi, n_steps):
    if JIT_ENABLED:
        return sep_cut_lattice_jit(float(x0c), xs0, np.int64(a), np.int64(q),
                                   float(lo), float(hi), int(n_steps))
    return sep_cut_lattice_np(float(x0c), xs0, int(a), int(q), float(lo),
                              float(hi), int(n_steps))


# ---------------------------------------------------------------------------
# pairwise separation times
# ---------------------------------------------------------------------------

@njit
def septime_pair_1d_jit(kind, params, wrap, x, y, eps, n_max):
    for t in range(n_max + 1):
        if dist1_jit(wrap, x, y) > eps:
            return t
        if t < n_max:
            x = step1_jit(kind, params, x)
            y = step1_jit(kind, params, y)
    return n_max + 1


@njit
def septime_pair_2d_jit(kind, params, x1, y1, x2, y2, eps, n_max):
    for t in range(n_max + 1):
        if dist2_jit(x1, y1, x2, y2) > eps:
            return t
        if t < n_max:
            x1, y1 = step2_jit(kind, params, x1, y1)
            x2, y2 = step2_jit(kind, params, x2, y2)
    return n_max + 1


@njit(parallel=True)
def septime_pairs_1d_jit(kind, params, wrap, xs, ii, jj, eps, n_max):
    P = ii.shape[0]
    out = np.empty(P, dtype=np.int64)
    for p in prange(P):
        out[p] = septime_pair_1d_jit(kind, params, wrap, xs[ii[p]], xs[jj[p]],
                                     eps, n_max)
    return out


def septime_pairs_1d_np(kind, params, wrap, xs, ii, jj, eps, n_max):
    P = ii.shape[0]
    out = np.full(P, n_max + 1, dtype=np.int64)
    idx = np.arange(P)
    x = xs[ii].copy()
    y = xs[jj].copy()
    for t in range(n_max + 1):
        gone = dist1_np(wrap, x, y) > eps
        if gone.any():
            out[idx[gone]] = t
            keep = ~gone
            idx = idx[keep]
            x = x[keep]
            y = y[keep]
            if idx.size == 0:
                break
        if t < n_max:
            x = step1_np(kind, params, x)
            y = step1_np(kind, params, y)
    return out


@njit(parallel=True)
def septime_pairs_2d_jit(kind, params, xs, ys, ii, jj, eps, n_max):
    P = ii.shape[0]
    out = np.empty(P, dtype=np.int64)
    for p in prange(P):
        out[p] = septime_pair_2d_jit(kind, params, xs[ii[p]], ys[ii[p]],
                                     xs[jj[p]], ys[jj[p]], eps, n_max)
    return out


def septime_pairs_2d_np(kind, params, xs, ys, ii, jj, eps, n_max):
    P = ii.shape[0]
    out = np.full(P, n_max + 1, dtype=np.int64)
    idx = np.arange(P)
    x1 = xs[ii].copy()
    y1 = ys[ii].copy()
    x2 = xs[jj].copy()
    y2 = ys[jj].copy()
    for t in range(n_max + 1):
        gone = dist2_np(x1, y1, x2, y2) > eps
        if gone.any():
            out[idx[gone]] = t
            keep = ~gone
            idx = idx[keep]
            x1, y1, x2, y2 = x1[keep], y1[keep], x2[keep], y2[keep]
            if idx.size == 0:
                break
        if t < n_max:
            x1, y1 = step2_np(kind, params, x1, y1)
            x2, y2 = step2_np(kind, params, x2, y2)
    return out


@njit(parallel=True)
def septime_pairs_rows_jit(orb, wrap, ii, jj, eps, n_max):
    P = ii.shape[0]
    out = np.empty(P, dtype=np.int64)
    for p in prange(P):
        ri = ii[p]
        rj = jj[p]
        sep = n_max + 1
        for t in range(n_max + 1):
            if dist1_jit(wrap, orb[ri, t], orb[rj, t]) > eps:
                sep = t
                break
        out[p] = sep
    return out


def septime_pairs_rows_np(orb, wrap, ii, jj, eps, n_max):
    P = ii.shape[0]
    out = np.full(P, n_max + 1, dtype=np.int64)
    idx = np.arange(P)
    for t in range(n_max + 1):
        gone = dist1_np(wrap, orb[ii[idx], t], orb[jj[idx], t]) > eps
        if gone.any():
            out[idx[gone]] = t
            idx = idx[~gone]
            if idx.size == 0:
                break
    return out


def septime_pairs_1d(kind, params, wrap, xs, ii, jj, eps, n_max):
    if JIT_ENABLED:
        return septime_pairs_1d_jit(kind, params, wrap, xs, ii, jj, eps,
                                    int(n_max))
    return septime_pairs_1d_np(kind, params, wrap, xs, ii, jj, eps, int(n_max))


def septime_pairs_2d(kind, params, xs, ys, ii, jj, eps, n_max):
    if JIT_ENABLED:
        return septime_pairs_2d_jit(kind, params, xs, ys, ii, jj, eps,
                                    int(n_max))
    return septime_pairs_2d_np(kind, params, xs, ys, ii, jj, eps, int(n_max))


def septime_pairs_rows(orb, wrap, ii, jj, eps, n_max):
    if JIT_ENABLED:
        return septime_pairs_rows_jit(orb, wrap, ii, jj, eps, int(n_max))
    return septime_pairs_rows_np(orb, wrap, ii, jj, eps, int(n_max))


# ---------------------------------------------------------------------------
# survival windows around each center in a sorted 1-d sample
#
# For maps where the orbit distance at every time is monotone in the initial
# distance (doubling, rotations, the identity and their order-preserving
# conjugates), "survives past n_ref against center i" selects a contiguous
# run of the sorted sample around i, so the run extent on each side can be
# found by binary search on the separation predicate.  cap_l/cap_r bound the
# search to the time-0 epsilon window (precomputed by value searches, which
# stay correct across the circle wrap-around).  ext_r[i] is the largest
# r <= cap_r[i] such that samples i+1 .. i+r (cyclically when cyclic == 1)
# survive past n_ref; ext_l mirrors it.
# ---------------------------------------------------------------------------

@njit(parallel=True)
def survival_windows_jit(kind, params, wrap, xs_sorted, eps, n_ref,
                         cap_l, cap_r, cyclic):
    M = xs_sorted.shape[0]
    ext_l = np.empty(M, dtype=np.int64)
    ext_r = np.empty(M, dtype=np.int64)
    for i in prange(M):
        for side in range(2):
            lo = 0
            hi = cap_r[i] if side == 0 else cap_l[i]
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if side == 0:
                    j = i + mid
                else:
                    j = i - mid
                if cyclic == 1:
                    j = j % M
                st = septime_pair_1d_jit(kind, params, wrap, xs_sorted[i],
                                         xs_sorted[j], eps, n_ref)
                if st > n_ref:
                    lo = mid
                else:
                    hi = mid - 1
            if side == 0:
                ext_r[i] = lo
            else:
                ext_l[i] = lo
    return ext_l, ext_r


def survival_windows_np(kind, params, wrap, xs_sorted, eps, n_ref,
                        cap_l, cap_r, cyclic):
    M = xs_sorted.shape[0]
    ext_l = np.empty(M, dtype=np.int64)
    ext_r = np.empty(M, dtype=np.int64)
    ii = np.empty(1, dtype=np.int64)
    jj = np.empty(1, dtype=np.int64)
    for i in range(M):
        for side in range(2):
            lo = 0
            hi = int(cap_r[i] if side == 0 else cap_l[i])
            while lo < hi:
                mid = (lo + hi + 1) // 2
                j = i + mid if side == 0 else i - mid
                if cyclic == 1:
                    j = j % M
                ii[0] = i
                jj[0] = j
                st = septime_pairs_1d_np(kind, params, wrap, xs_sorted, ii,
                                         jj, eps, n_ref)[0]
                if st > n_ref:
                    lo = mid
                else:
                    hi = mid - 1
            if side == 0:
                ext_r[i] = lo
            else:
                ext_l[i] = lo
    return ext_l, ext_r


def survival_windows(kind, params, wrap, xs_sorted, eps, n_ref, cap_l, cap_r,
                     cyclic):
    if JIT_ENABLED:
        return survival_windows_jit(kind, params, wrap, xs_sorted, eps,
                                    int(n_ref), cap_l, cap_r, cyclic)
    return survival_windows_np(kind, params, wrap, xs_sorted, eps,
                               int(n_ref), cap_l, cap_r, cyclic)


# ---------------------------------------------------------------------------
# greedy set cover on a CSR adjacency of surviving pairs
#
# Row i lists the sample indices j whose pair (i, j) survived past the grid
# base level; septime[p] > n_level filters the row down to level n_level.
# Selection rule: the center covering the most uncovered points, ties broken
# by the lowest original sample index.  A segment tree over the packed key
# gain * 2^32 + (2^32 - 1 - orig) makes every round O(log M).
# ---------------------------------------------------------------------------

_OBIG = np.int64(1) << np.int64(32)


@njit
def _tree_set(tree, S, leaf, key):
    k = S + leaf
    tree[k] = key
    k //= 2
    while k >= 1:
        a = tree[2 * k]
        b = tree[2 * k + 1]
        m = a if a >= b else b
        if tree[k] == m:
            break
        tree[k] = m
        k //= 2


@njit
def greedy_cover_csr_jit(indptr, indices, septime, n_level, orig, target):
    M = indptr.shape[0] - 1
    S = 1
    while S < M:
        S *= 2
    tree = np.full(2 * S, np.int64(-1), dtype=np.int64)
    gain = np.empty(M, dtype=np.int64)
    for i in range(M):
        g = 1
        for p in range(indptr[i], indptr[i + 1]):
            if septime[p] > n_level:
                g += 1
        gain[i] = g
        tree[S + i] = g * _OBIG + (_OBIG - 1 - orig[i])
    for k in range(S - 1, 0, -1):
        a = tree[2 * k]
        b = tree[2 * k + 1]
        tree[k] = a if a >= b else b
    covered = np.zeros(M, dtype=np.uint8)
    centers = np.empty(M, dtype=np.int64)
    ncov = 0
    nc = 0
    while ncov < target:
        if tree[1] < _OBIG:
            break  # no center gains anything; cannot happen while ncov < M
        k = 1
        while k < S:
            k *= 2
            if tree[k + 1] > tree[k]:
                k += 1
        c = k - S
        centers[nc] = c
        nc += 1
        if covered[c] == 0:
            covered[c] = 1
            ncov += 1
            gain[c] -= 1
            _tree_set(tree, S, c, gain[c] * _OBIG + (_OBIG - 1 - orig[c]))
            for pp in range(indptr[c], indptr[c + 1]):
                if septime[pp] > n_level:
                    w = indices[pp]
                    gain[w] -= 1
                    _tree_set(tree, S, w,
                              gain[w] * _OBIG + (_OBIG - 1 - orig[w]))
        for p in range(indptr[c], indptr[c + 1]):
            if septime[p] > n_level:
                j = indices[p]
                if covered[j] == 0:
                    covered[j] = 1
                    ncov += 1
                    gain[j] -= 1
                    _tree_set(tree, S, j,
                              gain[j] * _OBIG + (_OBIG - 1 - orig[j]))
                    for pp in range(indptr[j], indptr[j + 1]):
                        if septime[pp] > n_level:
                            w = indices[pp]
                            gain[w] -= 1
                            _tree_set(tree, S, w,
                                      gain[w] * _OBIG + (_OBIG - 1 - orig[w]))
    return centers[:nc], covered, ncov


def greedy_cover_csr_np(indptr, indices, septime, n_level, orig, target):
    M = indptr.shape[0] - 1
    live = septime > n_level
    gain = np.ones(M, dtype=np.int64)
    np.add.at(gain, np.repeat(np.arange(M), np.diff(indptr))[live], 1)
    key = gain * int(_OBIG) + (int(_OBIG) - 1 - orig)
    covered = np.zeros(M, dtype=np.uint8)
    centers = []
    ncov = 0
    while ncov < int(target):
        c = int(np.argmax(key))
        if key[c] < int(_OBIG):
            break
        centers.append(c)
        row = indices[indptr[c]:indptr[c + 1]][live[indptr[c]:indptr[c + 1]]]
        newly = [c] if covered[c] == 0 else []
        newly.extend(int(j) for j in row if covered[j] == 0)
        for j in newly:
            covered[j] = 1
            ncov += 1
            gain[j] -= 1
            key[j] = gain[j] * int(_OBIG) + (int(_OBIG) - 1 - orig[j])
            nb = indices[indptr[j]:indptr[j + 1]][
                live[indptr[j]:indptr[j + 1]]]
            gain[nb] -= 1
            key[nb] = gain[nb] * int(_OBIG) + (int(_OBIG) - 1 - orig[nb])
    return (np.array(centers, dtype=np.int64), covered, ncov)


def greedy_cover_csr(indptr, indices, septime, n_level, orig, target):
    if JIT_ENABLED:
        return greedy_cover_csr_jit(indptr, indices, septime,
                                    np.int64(n_level), orig, np.int64(target))
    return greedy_cover_csr_np(indptr, indices, septime, int(n_level), orig,
                               int(target))


# ---------------------------------------------------------------------------
# greedy set cover over monotone index windows
#
# Candidates are the sorted sample points; candidate i covers the contiguous
# run of sorted positions [start[i], start[i] + length[i] - 1].  Both start
# and start + length - 1 must be nondecreasing (symmetric interval relations
# have this staircase property automatically).  On the circle, start may be
# negative and the end may pass M; positions are taken mod M.  Selection rule
# matches the CSR greedy: most uncovered points, ties to the lowest original
# sample index.
#
# The compiled path keeps candidate keys gain * 2^32 + (2^32 - 1 - orig) in a
# range-add max segment tree; covering a point decrements the gain of the
# candidate range whose window contains it (found by binary search on the
# monotone bounds), so a full run costs O((M + rounds) log M).
# ---------------------------------------------------------------------------

@njit
def _lb_geq(arr, v):
    """First index with arr[idx] >= v, or len(arr)."""
    lo = 0
    hi = arr.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] >= v:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit
def _ub_leq(arr, v):
    """Last index with arr[idx] <= v, or -1."""
    lo = -1
    hi = arr.shape[0] - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if arr[mid] <= v:
            lo = mid
        else:
            hi = mid - 1
    return lo


@njit
def _win_update(mx, ad, S, lo, hi, v):
    """Add v to all leaf keys in [lo, hi] and restore max invariants."""
    if lo > hi:
        return
    left = lo + S
    right = hi + S + 1
    ll = left
    rr = right - 1
    while left < right:
        if left & 1:
            mx[left] += v
            ad[left] += v
            left += 1
        if right & 1:
            right -= 1
            mx[right] += v
            ad[right] += v
        left >>= 1
        right >>= 1
    k = ll >> 1
    while k >= 1:
        a = mx[2 * k]
        b = mx[2 * k + 1]
        mx[k] = (a if a >= b else b) + ad[k]
        k >>= 1
    k = rr >> 1
    while k >= 1:
        a = mx[2 * k]
        b = mx[2 * k + 1]
        mx[k] = (a if a >= b else b) + ad[k]
        k >>= 1


@njit
def _win_argmax(mx, S):
    """Leaf holding the maximum key (keys of live leaves are unique)."""
    i = 1
    while i < S:
        i *= 2
        if mx[i + 1] > mx[i]:
            i += 1
    return i - S


@njit
def _next_uncovered(nxt, p):
    """Next uncovered position >= p, with path compression."""
    r = p
    while nxt[r] != r:
        r = nxt[r]
    while nxt[p] != p:
        q = nxt[p]
        nxt[p] = r
        p = q
    return r


@njit
def greedy_cover_windows_jit(start, length, orig, target, cyclic):
    M = start.shape[0]
    end = start + length - 1
    S = 1
    while S < M:
        S *= 2
    neg = np.int64(-1) << np.int64(50)
    mx = np.full(2 * S, neg, dtype=np.int64)
    ad = np.zeros(2 * S, dtype=np.int64)
    for i in range(M):
        mx[S + i] = length[i] * _OBIG + (_OBIG - 1 - orig[i])
    for k in range(S - 1, 0, -1):
        a = mx[2 * k]
        b = mx[2 * k + 1]
        mx[k] = a if a >= b else b
    covered = np.zeros(M, dtype=np.uint8)
    nxt = np.arange(M + 1)
    centers = np.empty(M, dtype=np.int64)
    nc = 0
    ncov = 0
    while ncov < target:
        if mx[1] < _OBIG:
            break  # nothing gains; unreachable while ncov < M
        c = _win_argmax(mx, S)
        centers[nc] = c
        nc += 1
        # decompose the window of c into plain ranges of [0, M)
        if cyclic == 1 and length[c] >= M:
            r1lo, r1hi, r2lo, r2hi = 0, M - 1, 1, 0
        elif cyclic == 1:
            a0 = start[c] % M
            b0 = end[c] % M
            if a0 <= b0:
                r1lo, r1hi, r2lo, r2hi = a0, b0, 1, 0
            else:
                r1lo, r1hi, r2lo, r2hi = a0, M - 1, 0, b0
        else:
            r1lo, r1hi, r2lo, r2hi = start[c], end[c], 1, 0
        for half in range(2):
            plo = r1lo if half == 0 else r2lo
            phi = r1hi if half == 0 else r2hi
            if plo > phi:
                continue
            p = _next_uncovered(nxt, plo)
            while p <= phi:
                covered[p] = 1
                ncov += 1
                nxt[p] = p + 1
                for sh in range(-1, 2):
                    if cyclic == 0 and sh != 0:
                        continue
                    pv = p + sh * M
                    il = _lb_geq(end, pv)
                    ir = _ub_leq(start, pv)
                    if il <= ir and il < M:
                        _win_update(mx, ad, S, il, ir, -_OBIG)
                p = _next_uncovered(nxt, p + 1)
    return centers[:nc], covered, ncov


def greedy_cover_windows_np(start, length, orig, target, cyclic):
    M = start.shape[0]
    tie = int(_OBIG) - 1 - orig.astype(np.int64)
    s0 = np.mod(start, M) if cyclic else start.astype(np.int64)
    uncov = np.ones(M, dtype=np.int64)
    covered = np.zeros(M, dtype=np.uint8)
    centers = []
    ncov = 0
    while ncov < int(target):
        if cyclic:
            pref = np.concatenate(
                ([0], np.cumsum(np.concatenate((uncov, uncov)))))
        else:
            pref = np.concatenate(([0], np.cumsum(uncov)))
        gain = pref[s0 + length] - pref[s0]
        c = int(np.argmax(gain * int(_OBIG) + tie))
        if gain[c] <= 0:
            break
        centers.append(c)
        a = int(s0[c])
        ln = int(length[c])
        if cyclic and a + ln > M:
            idx = np.concatenate((np.arange(a, M), np.arange(0, a + ln - M)))
        else:
            idx = np.arange(a, a + ln)
        newly = idx[covered[idx] == 0]
        covered[newly] = 1
        uncov[newly] = 0
        ncov += newly.size
    return np.array(centers, dtype=np.int64), covered, ncov


def greedy_cover_windows(start, length, orig, target, cyclic):
    if JIT_ENABLED:
        return greedy_cover_windows_jit(start, length, orig,
                                        np.int64(target), np.int64(cyclic))
    return greedy_cover_windows_np(start, length, orig, int(target),
                                   int(cyclic))


# ---------------------------------------------------------------------------
# separation times along an empirical orbit, organized by lag
#
# The sample is M consecutive orbit points x_0 .. x_{M-1} (xs extends at
# least n_max further so depth-n_max windows fit).  Every sample pair is a
# lag pair (k, k + delta), and along one lag the separation times of all
# pairs come from a single backward next-exceedance sweep of
# g(s) = |xs[s] - xs[s + delta]|, interval metric.  Only pairs separating
# after n_base are returned.
# ---------------------------------------------------------------------------

_FAR = np.int64(1) << np.int64(60)


@njit
def lag_pairs_jit(xs, M, eps, n_base, n_max):
    cnt = np.zeros(M, dtype=np.int64)
    for delta in range(1, M):
        kmax = M - 1 - delta
        ne = _FAR
        c = 0
        for s in range(kmax + n_max, -1, -1):
            g = xs[s] - xs[s + delta]
            if g < 0.0:
                g = -g
            if g > eps:
                ne = s
            if s <= kmax:
                sep = ne - s
                if sep > n_max:
                    sep = n_max + 1
                if sep > n_base:
                    c += 1
        cnt[delta] = c
    offs = np.zeros(M + 1, dtype=np.int64)
    for d in range(1, M):
        offs[d + 1] = offs[d] + cnt[d]
    total = offs[M]
    ii = np.empty(total, dtype=np.int64)
    jj = np.empty(total, dtype=np.int64)
    sp = np.empty(total, dtype=np.int64)
    for delta in range(1, M):
        kmax = M - 1 - delta
        ne = _FAR
        p = offs[delta] + cnt[delta] - 1
        for s in range(kmax + n_max, -1, -1):
            g = xs[s] - xs[s + delta]
            if g < 0.0:
                g = -g
            if g > eps:
                ne = s
            if s <= kmax:
                sep = ne - s
                if sep > n_max:
                    sep = n_max + 1
                if sep > n_base:
                    ii[p] = s
                    jj[p] = s + delta
                    sp[p] = sep
                    p -= 1
    return ii, jj, sp


def lag_pairs_np(xs, M, eps, n_base, n_max):
    out_i, out_j, out_s = [], [], []
    for delta in range(1, M):
        kmax = M - 1 - delta
        hi = kmax + n_max + 1
        g = np.abs(xs[:hi] - xs[delta:delta + hi])
        where = np.where(g > eps, np.arange(hi), int(_FAR))
        ne = np.minimum.accumulate(where[::-1])[::-1]
        sep = np.minimum(ne[:kmax + 1] - np.arange(kmax + 1), n_max + 1)
        keep = sep > n_base
        if keep.any():
            kk = np.flatnonzero(keep)
            out_i.append(kk)
            out_j.append(kk + delta)
            out_s.append(sep[keep])
    if not out_i:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy(), z.copy()
    return (np.concatenate(out_i).astype(np.int64),
            np.concatenate(out_j).astype(np.int64),
            np.concatenate(out_s).astype(np.int64))


def lag_pairs(xs, M, eps, n_base, n_max):
    if xs.shape[0] < M + n_max:
        raise ValueError("orbit array must extend n_max beyond the sample")
    if JIT_ENABLED:
        return lag_pairs_jit(xs, np.int64(M), eps, np.int64(n_base),
                             np.int64(n_max))
    return lag_pairs_np(xs, int(M), float(eps), int(n_base), int(n_max))
