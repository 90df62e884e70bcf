"""Covering-number estimation by greedy set cover over a sample.

N(n, eps, eps_prime) is estimated as the number of Bowen sets, centered at
sample points, that a greedy cover needs before reaching measure 1 -
eps_prime of the sample.  Selection rule: the center covering the most
uncovered points, ties to the lowest sample index; this makes every run
deterministic and replayable.

Backends (chosen per system, overridable):

``windows``
    1-d maps whose Bowen sets are intervals moving monotonically with the
    center (identity, rotations, doubling and their order-preserving
    conjugates).  Covers are computed on sorted positions; the doubling and
    rotation window half-widths are exact closed forms, the conjugated ones
    come from a per-center binary search on the separation predicate.  No
    pair storage at all, so deep n levels stay cheap.

``enumerate``
    generic 1-d and 2-d maps: all time-0 epsilon-neighbor pairs are listed
    (the time-0 distance is part of the sup, so this prefilter is exact),
    separation times are computed per pair, and the surviving pairs form a
    symmetric CSR graph reused by every grid level.

``lag``
    empirical-orbit measures: sample points are consecutive orbit points,
    so pair (k, k + delta) separation times for one lag all come from one
    next-exceedance sweep; the graph is assembled in two passes without
    materializing orbit copies.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import bowen as B
from . import kernels as K
from . import systems as S
from .scaling import DEFAULT_W, GaugeFn, RatioSeries, SlopeFit, tail_proxies, tail_slope

# Above this many bytes the 1-d orbit matrix is not materialized and pair
# separation times fall back to joint stepping (same results, slower, full M
# retained).
MEM_CAP_BYTES = 1_200_000_000

_MONOTONE_BASE = (K.KIND_IDENTITY, K.KIND_ROTATION, K.KIND_DOUBLING)


@dataclass(frozen=True)
class CoverResult:
    centers: np.ndarray        # original sample indices, selection order
    count: int
    covered_fraction: float
    n: int
    eps: float
    eps_prime: float
    M: int
    flags: tuple[str, ...] = ()


@dataclass
class ComplexityCurve:
    gauge: GaugeFn
    n: np.ndarray
    results: list[CoverResult]
    ratio: np.ndarray          # log2(N_hat) / f(n)
    eps: float
    eps_prime: float
    M: int
    seed: int
    backend: str

    def counts(self) -> np.ndarray:
        return np.array([r.count for r in self.results], dtype=np.int64)

    def limited(self) -> np.ndarray:
        return np.array(["sample_limit" in r.flags for r in self.results])

    def series(self) -> RatioSeries:
        return RatioSeries(self.n, self.ratio, self.limited(), self.gauge)

    def tail_fit(self, W: int = DEFAULT_W) -> SlopeFit:
        return tail_slope(self.n, np.log2(self.counts()), self.gauge,
                          keep=~self.limited(), W=W)

    def proxies(self, W: int = DEFAULT_W) -> tuple[float, float]:
        return tail_proxies(self.series(), W)


def _target(M: int, eps_prime: float) -> int:
    if not 0.0 < eps_prime <= 0.5:
        raise ValueError("eps_prime must be in (0, 1/2]")
    return min(M, math.ceil((1.0 - eps_prime) * M))


def covering_backend(sys: S.SystemDescriptor) -> str:
    if sys.measure == "empirical":
        return "lag"
    if sys.dim == 1 and sys.kind in _MONOTONE_BASE:
        return "windows"
    if sys.kind in (K.KIND_CONJ_SQUARE, K.KIND_CONJ_ROTATE) and \
            int(sys.params[1]) in _MONOTONE_BASE:
        return "windows"
    return "enumerate"


# ---------------------------------------------------------------------------
# windows backend
# ---------------------------------------------------------------------------

def _analytic_halfwidth(sys: S.SystemDescriptor, eps: float,
                        n: int) -> Optional[float]:
    kind = sys.kind
    if kind == K.KIND_CONJ_ROTATE:
        kind = int(sys.params[1])
    if kind in (K.KIND_IDENTITY, K.KIND_ROTATION):
        return eps
    if kind == K.KIND_DOUBLING:
        if eps >= 0.25:
            raise ValueError("doubling windows need eps < 1/4")
        return eps * 0.5 ** n
    return None


def _windows_at_level(sys: S.SystemDescriptor, xs_sorted: np.ndarray,
                      eps: float, n: int):
    """(start, length) of the surviving sorted-index window per center."""
    M = xs_sorted.shape[0]
    idx = np.arange(M, dtype=np.int64)
    cyclic = sys.wrap1 == 1
    delta = _analytic_halfwidth(sys, eps, n)
    if delta is not None:
        lo_v = xs_sorted - delta
        hi_v = xs_sorted + delta
        if cyclic:
            if 2.0 * delta >= 1.0:
                return (np.zeros(M, dtype=np.int64),
                        np.full(M, M, dtype=np.int64), True)
            sl = np.searchsorted(xs_sorted, np.mod(lo_v, 1.0), side="left")
            start = np.where(lo_v < 0.0, sl - M, sl).astype(np.int64)
            er = np.searchsorted(xs_sorted, np.mod(hi_v, 1.0),
                                 side="right") - 1
            end = np.where(hi_v >= 1.0, er + M, er).astype(np.int64)
        else:
            start = np.searchsorted(xs_sorted, np.clip(lo_v, 0.0, 1.0),
                                    side="left").astype(np.int64)
            end = (np.searchsorted(xs_sorted, np.clip(hi_v, 0.0, 1.0),
                                   side="right") - 1).astype(np.int64)
        return start, end - start + 1, cyclic
    # conjugated family: exact time-0 caps, then predicate bisection
    cap_l = idx - np.searchsorted(xs_sorted, xs_sorted - eps, side="left")
    cap_r = (np.searchsorted(xs_sorted, xs_sorted + eps, side="right")
             - 1 - idx)
    ext_l, ext_r = K.survival_windows(sys.kind, sys.params, sys.wrap1,
                                      xs_sorted, eps, n,
                                      cap_l.astype(np.int64),
                                      cap_r.astype(np.int64),
                                      1 if cyclic else 0)
    return idx - ext_l, ext_l + ext_r + 1, cyclic


def _check_monotone(start: np.ndarray, length: np.ndarray) -> None:
    if np.any(np.diff(start) < 0) or np.any(np.diff(start + length) < 0):
        raise AssertionError("window bounds lost monotonicity")


# ---------------------------------------------------------------------------
# pair-graph backends
# ---------------------------------------------------------------------------

def _grouped_ranges(starts: np.ndarray, stops: np.ndarray):
    """Concatenation of arange(starts[i], stops[i]) plus a repeat index."""
    counts = np.maximum(stops - starts, 0)
    total = int(counts.sum())
    if total == 0:
        return (np.zeros(0, dtype=np.int64),) * 2
    reps = np.repeat(np.arange(starts.shape[0]), counts)
    offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return reps.astype(np.int64), (starts[reps] + offs).astype(np.int64)


def _pairs_1d(sys: S.SystemDescriptor, xs_sorted: np.ndarray, eps: float,
              n_base: int, n_max: int, mem_cap: int):
    if sys.wrap1 != 0:
        raise ValueError("1-d pair enumeration assumes the interval metric")
    M = xs_sorted.shape[0]
    hi = np.searchsorted(xs_sorted, xs_sorted + eps, side="right")
    ii, jj = _grouped_ranges(np.arange(M, dtype=np.int64) + 1,
                             hi.astype(np.int64))
    if M * (n_max + 1) * 8 <= mem_cap:
        orb = K.orbit_matrix1(sys.kind, sys.params, xs_sorted, n_max)
        sep = K.septime_pairs_rows(orb, sys.wrap1, ii, jj, eps, n_max)
    else:
        sep = K.septime_pairs_1d(sys.kind, sys.params, sys.wrap1, xs_sorted,
                                 ii, jj, eps, n_max)
    keep = sep > n_base
    return ii[keep], jj[keep], sep[keep]


def _pairs_2d(sys: S.SystemDescriptor, xs: np.ndarray, ys: np.ndarray,
              eps: float, n_base: int, n_max: int, chunk: int = 4096):
    """Time-0 neighbor pairs of a sample sorted by x (both coords wrap)."""
    M = xs.shape[0]
    lo_v = xs - eps
    hi_v = xs + eps
    sl = np.searchsorted(xs, np.mod(lo_v, 1.0), side="left")
    l_ext = np.where(lo_v < 0.0, sl - M, sl).astype(np.int64)
    sr = np.searchsorted(xs, np.mod(hi_v, 1.0), side="right")
    r_ext = np.where(hi_v >= 1.0, sr + M, sr).astype(np.int64)
    if 2.0 * eps >= 1.0:
        l_ext = np.zeros(M, dtype=np.int64)
        r_ext = np.full(M, M, dtype=np.int64)
    out_i, out_j = [], []
    for a in range(0, M, chunk):
        b = min(a + chunk, M)
        reps, pos = _grouped_ranges(l_ext[a:b], r_ext[a:b])
        pi = reps + a
        pj = np.mod(pos, M)
        keep = pi < pj
        pi, pj = pi[keep], pj[keep]
        dy = np.abs(ys[pi] - ys[pj])
        keep = np.minimum(dy, 1.0 - dy) <= eps
        out_i.append(pi[keep])
        out_j.append(pj[keep])
    ii = np.concatenate(out_i) if out_i else np.zeros(0, dtype=np.int64)
    jj = np.concatenate(out_j) if out_j else np.zeros(0, dtype=np.int64)
    sep = K.septime_pairs_2d(sys.kind, sys.params, xs, ys, ii, jj, eps,
                             n_max)
    keep = sep > n_base
    return ii[keep], jj[keep], sep[keep]


def _pairs_lag(sys: S.SystemDescriptor, sample: np.ndarray, eps: float,
               n_base: int, n_max: int):
    if sys.wrap1 != 0:
        raise ValueError("lag pairs assume the interval metric")
    xs = sample[:, 0]
    tail = K.orbit1(sys.kind, sys.params, float(xs[-1]), n_max)
    xs_ext = np.concatenate((xs, tail[1:]))
    return K.lag_pairs(xs_ext, xs.shape[0], eps, n_base, n_max)


def _build_csr(M: int, ii: np.ndarray, jj: np.ndarray, sep: np.ndarray):
    rows = np.concatenate((ii, jj))
    cols = np.concatenate((jj, ii))
    vals = np.concatenate((sep, sep))
    indptr = np.zeros(M + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(rows, minlength=M))
    order = np.argsort(rows, kind="stable")
    return indptr, cols[order].astype(np.int64), vals[order].astype(np.int64)


# ---------------------------------------------------------------------------
# shared cover state: built once per sample, queried per level
# ---------------------------------------------------------------------------

class _CoverState:
    def __init__(self, sys: S.SystemDescriptor, sample: np.ndarray,
                 eps: float, n_base: int, n_max: int, backend: str,
                 mem_cap: int):
        self.sys = sys
        self.eps = eps
        self.backend = backend
        M = sample.shape[0]
        self.M = M
        if backend == "windows":
            order = np.argsort(sample[:, 0], kind="stable")
            self.xs = np.ascontiguousarray(sample[order, 0])
            self.orig = order.astype(np.int64)
        elif backend == "lag":
            self.orig = np.arange(M, dtype=np.int64)
            ii, jj, sep = _pairs_lag(sys, sample, eps, n_base, n_max)
            self.csr = _build_csr(M, ii, jj, sep)
        elif backend == "enumerate":
            order = np.argsort(sample[:, 0], kind="stable")
            self.orig = order.astype(np.int64)
            if sys.dim == 1:
                self.xs = np.ascontiguousarray(sample[order, 0])
                ii, jj, sep = _pairs_1d(sys, self.xs, eps, n_base, n_max,
                                        mem_cap)
            else:
                xs = np.ascontiguousarray(sample[order, 0])
                ys = np.ascontiguousarray(sample[order, 1])
                ii, jj, sep = _pairs_2d(sys, xs, ys, eps, n_base, n_max)
            self.csr = _build_csr(M, ii, jj, sep)
        else:
            raise ValueError(f"unknown backend {backend!r}")

    def cover(self, n: int, target: int):
        if self.backend == "windows":
            start, length, cyclic = _windows_at_level(self.sys, self.xs,
                                                      self.eps, n)
            _check_monotone(start, length)
            centers, _, ncov = K.greedy_cover_windows(
                start, length, self.orig, target, 1 if cyclic else 0)
        else:
            indptr, indices, sep = self.csr
            centers, _, ncov = K.greedy_cover_csr(indptr, indices, sep, n,
                                                  self.orig, target)
        return self.orig[centers], int(ncov)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def greedy_cover(sys: S.SystemDescriptor, sample: np.ndarray, n: int,
                 eps: float, eps_prime: float, backend: str = "auto",
                 mem_cap: int = MEM_CAP_BYTES) -> CoverResult:
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim != 2 or sample.shape[1] != sys.dim:
        raise ValueError("sample must have shape (M, dim)")
    M = sample.shape[0]
    target = _target(M, eps_prime)
    if backend == "auto":
        backend = covering_backend(sys)
    state = _CoverState(sys, sample, eps, n, n, backend, mem_cap)
    centers, ncov = state.cover(n, target)
    assert ncov >= target, "greedy cover fell short of its target"
    flags = ("sample_limit",) if 2 * centers.shape[0] >= target else ()
    return CoverResult(centers, int(centers.shape[0]), ncov / M, int(n),
                       eps, eps_prime, M, flags)


def complexity_curve(sys: S.SystemDescriptor, M: int,
                     n_grid: Sequence[int], eps: float, eps_prime: float,
                     gauge: GaugeFn, seed: int = 0, backend: str = "auto",
                     mem_cap: int = MEM_CAP_BYTES) -> ComplexityCurve:
    """Greedy cover size along an n grid, one fixed sample throughout."""
    n_grid = np.asarray(n_grid, dtype=np.int64)
    if np.any(np.diff(n_grid) <= 0):
        raise ValueError("n_grid must be strictly increasing")
    if n_grid[0] < gauge.min_n():
        raise ValueError(f"gauge {gauge.label} needs n >= {gauge.min_n()}")
    if backend == "auto":
        backend = covering_backend(sys)
    sample = S.sample_measure(sys, M, seed)
    target = _target(M, eps_prime)
    state = _CoverState(sys, sample, eps, int(n_grid[0]), int(n_grid[-1]),
                        backend, mem_cap)
    results = []
    ratios = np.empty(n_grid.size)
    prev = -1
    for i, n in enumerate(n_grid):
        centers, ncov = state.cover(int(n), target)
        count = int(centers.shape[0])
        flags = []
        if 2 * count >= target:
            flags.append("sample_limit")
        if count == prev:
            flags.append("saturated")
        results.append(CoverResult(centers, count, ncov / M, int(n), eps,
                                   eps_prime, M, tuple(flags)))
        ratios[i] = math.log2(count) / gauge(int(n))
        prev = count
    return ComplexityCurve(gauge, n_grid, results, ratios, eps, eps_prime,
                           M, seed, backend)


def verify_cover(sys: S.SystemDescriptor, sample: np.ndarray,
                 result: CoverResult) -> float:
    """Replay the certificate: recompute which sample points sit in some
    chosen center's Bowen set; returns the covered fraction (must equal the
    recorded one exactly)."""
    sample = np.asarray(sample, dtype=np.float64)
    covered = np.zeros(sample.shape[0], dtype=bool)
    for c in result.centers:
        sep = B.companion_septimes(sys, sample[int(c)], sample, result.eps,
                                   result.n)
        covered |= sep > result.n
    return float(covered.mean())


def exact_cover_count(membership, target_fraction: float) -> int:
    """True minimum number of rows of a boolean membership matrix whose
    union reaches the target fraction of columns; branch and bound."""
    m = np.asarray(membership, dtype=bool)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("membership must be a square M x M matrix")
    M = m.shape[0]
    if M > 24:
        raise ValueError("exact solver capped at M <= 24 points")
    need = min(M, math.ceil(target_fraction * M))
    if need <= 0:
        return 0
    masks = [int(sum(1 << j for j in range(M) if m[i, j])) for i in range(M)]

    def popcount(v: int) -> int:
        return v.bit_count()

    # greedy upper bound, same tie rule as production greedy
    covered = 0
    upper = 0
    while popcount(covered) < need:
        best_i = max(range(M),
                     key=lambda i: (popcount(masks[i] & ~covered), -i))
        if popcount(masks[best_i] & ~covered) == 0:
            raise ValueError("target fraction unreachable")
        covered |= masks[best_i]
        upper += 1
    best = upper

    def dfs(covered: int, count: int, avail: list[int]) -> None:
        nonlocal best
        have = popcount(covered)
        if have >= need:
            best = min(best, count)
            return
        if count + 1 >= best:
            return
        gains = sorted((popcount(mk & ~covered) for mk in avail),
                       reverse=True)
        missing = need - have
        lb = 0
        for g in gains:
            if missing <= 0 or g == 0:
                break
            missing -= g
            lb += 1
        if missing > 0 or count + lb >= best:
            return
        pick = max(range(len(avail)),
                   key=lambda i: (popcount(avail[i] & ~covered), -i))
        mk = avail[pick]
        rest = avail[:pick] + avail[pick + 1:]
        dfs(covered | mk, count + 1, rest)
        dfs(covered, count, rest)

    dfs(0, 0, masks)
    return best


def membership_matrix(sys: S.SystemDescriptor, sample: np.ndarray, n: int,
                      eps: float) -> np.ndarray:
    """Dense Bowen-membership matrix of a small sample (toy instances)."""
    sample = np.asarray(sample, dtype=np.float64)
    M = sample.shape[0]
    if M > 24:
        raise ValueError("dense membership capped at M <= 24 points")
    out = np.zeros((M, M), dtype=bool)
    for i in range(M):
        sep = B.companion_septimes(sys, sample[i], sample, eps, n)
        out[i] = sep > n
        out[i, i] = True
    return out
