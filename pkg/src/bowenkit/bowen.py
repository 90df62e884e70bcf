"""Bowen-set membership, measure estimation, and local entropy ratios.

Measure schemes
---------------

Lebesgue-type systems use ball-importance sampling: points are drawn
uniformly in the time-0 sup-ball around the center (a cube of volume
(2 eps)^d, clipped to the domain on non-wrapping coordinates) and the Bowen
set mass is the surviving fraction times the cube mass.  Every such sample
is a companion at n = 0, so companion counts stay usable deep into n.

Empirical-measure systems count companions over the stored sample directly
(global scheme); a singular measure cannot be volume-normalized.

Ratio normalization
-------------------

The reported ratio is conditional on the time-0 ball:

    r(n) = -log2( k_n / k_0 ) / f(n)

where k_n is the companion count at depth n on the fixed sample and k_0 the
count at depth 0.  The raw mass estimate keeps the -log2 mu floor coming
from the epsilon-ball itself, which buries slow decay under a constant at
desk scale; conditioning removes exactly that constant and nothing else.
Isometries get r identically 0, and one doubling step halves k, giving 1
bit per step, as the calibration criteria require.  Raw mu-hat estimates
are still reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels as K
from . import systems as S
from .scaling import DEFAULT_W, GaugeFn, RatioSeries, SlopeFit, tail_slope

Z95 = 1.959963984540054

# below ~8 hits the Wilson interval spans more than half a bit either way,
# so such points are reported but kept out of tail fits
LOW_COUNT_FLOOR = 8


def wilson_interval(k: int, M: int, z: float = Z95) -> tuple[float, float]:
    if M <= 0:
        raise ValueError("M must be positive")
    p = k / M
    denom = 1.0 + z * z / M
    center = (p + z * z / (2 * M)) / denom
    half = z * math.sqrt(p * (1.0 - p) / M + z * z / (4 * M * M)) / denom
    # center - half is exactly 0 (resp. 1) at k = 0 (resp. k = M) on paper;
    # keep the float version from leaking past the point estimate
    lo = 0.0 if k == 0 else min(max(0.0, center - half), p)
    hi = 1.0 if k == M else max(min(1.0, center + half), p)
    return lo, hi


@dataclass(frozen=True)
class BowenQuery:
    """Center, depth and radius of one Bowen-set question."""
    x: tuple
    n: int
    eps: float

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if not 0.0 < self.eps < 0.5:
            raise ValueError("eps must be in (0, 1/2)")


@dataclass(frozen=True)
class MeasureEstimate:
    value: float          # mu-hat of the Bowen set
    k: int                # companion count
    M: int                # sample size
    scheme: str           # "ball-importance" | "global"
    ci: tuple[float, float]
    flags: tuple[str, ...] = ()


@dataclass
class BkSeries:
    gauge: GaugeFn
    n: np.ndarray
    estimates: list[MeasureEstimate]
    ratio: np.ndarray       # conditional ratio in bits
    censored: np.ndarray
    k0: int
    eps: float
    center: np.ndarray

    def series(self) -> RatioSeries:
        return RatioSeries(self.n, self.ratio, self.censored, self.gauge)

    def tail_fit(self, W: int = DEFAULT_W) -> SlopeFit:
        ks = self.counts()
        ys = -np.log2(np.maximum(ks, 1) / self.k0)
        keep = ~self.censored & (ks >= LOW_COUNT_FLOOR)
        return tail_slope(self.n, ys, self.gauge, keep=keep, W=W)

    def raw_ratio(self) -> np.ndarray:
        """Ratio against the absolute measure -log2(mu-hat)/f(n), with no
        conditioning on the time-0 cell; this is the series local-entropy
        statements are about, while `ratio` subtracts the cell mass."""
        mu = np.array([e.value for e in self.estimates])
        out = np.full(self.n.size, np.nan)
        pos = mu > 0
        out[pos] = -np.log2(mu[pos]) / self.gauge(self.n[pos])
        return out

    def counts(self) -> np.ndarray:
        return np.array([e.k for e in self.estimates], dtype=np.int64)


# ---------------------------------------------------------------------------
# sampling cells
# ---------------------------------------------------------------------------

def _importance_cell(sys: S.SystemDescriptor, x: np.ndarray, eps: float):
    """Per-coordinate (lo, length) of the time-0 cube and its measure mass."""
    lo = np.empty(sys.dim)
    ln = np.empty(sys.dim)
    mass = 1.0
    for c, w in enumerate(sys.metric.wrap):
        if w:
            lo[c] = (x[c] - eps) % 1.0
            ln[c] = min(2.0 * eps, 1.0)
        else:
            a = max(x[c] - eps, 0.0)
            b = min(x[c] + eps, 1.0)
            lo[c] = a
            ln[c] = b - a
        mass *= ln[c]
    return lo, ln, mass


def sample_companion_cube(sys: S.SystemDescriptor, x: np.ndarray, eps: float,
                          M: int, seed: int):
    """Uniform sample of the time-0 cube under the system's measure.

    Returns (points (M, d), cell mass).  For plain Lebesgue systems this is
    uniform in the cube.  For the square-conjugated family the invariant
    measure is the pushforward of Lebesgue under phi(x) = x^2, so the draw
    happens uniformly in phi^{-1}(cube) and is pushed forward; the cell mass
    is the length of that preimage.
    """
    rng = S.rng_for(seed)
    u = rng.random((M, sys.dim))
    lo, ln, mass = _importance_cell(sys, x, eps)
    if sys.measure == "lebesgue":
        pts = lo + u * ln
        for c, w in enumerate(sys.metric.wrap):
            if w:
                pts[:, c] %= 1.0
        return pts, mass
    if sys.measure == "pushforward_square":
        a = math.sqrt(lo[0])
        b = math.sqrt(lo[0] + ln[0])
        pts = (a + u[:, :1] * (b - a)) ** 2
        return pts, b - a
    raise ValueError("cube sampling needs a Lebesgue-type measure")


# ---------------------------------------------------------------------------
# separation times of a sample against a center
# ---------------------------------------------------------------------------

def companion_septimes(sys: S.SystemDescriptor, x: np.ndarray,
                       pts: np.ndarray, eps: float, n_max: int) -> np.ndarray:
    """First time each sample point leaves the eps-tube around the orbit of
    x, or n_max + 1 if it never does; a point is a companion at depth n iff
    its entry exceeds n."""
    x = np.asarray(x, dtype=np.float64)
    if sys.is_isometry:
        d0 = np.zeros(pts.shape[0])
        for c, w in enumerate(sys.metric.wrap):
            d = np.abs(pts[:, c] - x[c])
            if w:
                d = d % 1.0
                d = np.where(d > 0.5, 1.0 - d, d)
            d0 = np.maximum(d0, d)
        return np.where(d0 <= eps, n_max + 1, 0).astype(np.int64)
    if (sys.kind == K.KIND_CUT_TORUS and sys.lattice is not None
            and eps < 0.25):
        dy = np.abs(pts[:, 1] - x[1]) % 1.0
        dy = np.where(dy > 0.5, 1.0 - dy, dy)
        if np.any(dy > eps):
            raise ValueError("cut_torus lattice path expects a cube sample")
        a, q = sys.lattice
        return K.sep_cut_lattice(x[0], np.ascontiguousarray(pts[:, 0]),
                                 a, q, sys.params[1], sys.params[2], n_max)
    if sys.dim == 1:
        corb = K.orbit1(sys.kind, sys.params, x[0], n_max)
        return K.sep_center_1d(sys.kind, sys.params, sys.wrap1, corb,
                               np.ascontiguousarray(pts[:, 0]), eps, n_max)
    corb = K.orbit2(sys.kind, sys.params, x[0], x[1], n_max)
    return K.sep_center_2d(sys.kind, sys.params,
                           np.ascontiguousarray(corb[:, 0]),
                           np.ascontiguousarray(corb[:, 1]),
                           np.ascontiguousarray(pts[:, 0]),
                           np.ascontiguousarray(pts[:, 1]), eps, n_max)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def bowen_contains(sys: S.SystemDescriptor, x, n: int, eps: float,
                   y) -> bool:
    """Exact membership of y in B(n, x, eps)."""
    return S.sup_orbit_distance(sys, x, y, n, cutoff=eps) <= eps


def _estimate(k: int, M: int, scheme: str, mass: float) -> MeasureEstimate:
    lo, hi = wilson_interval(k, M)
    if k == 0:
        flags = ("underflow: raise M or lower n",)
    elif k < LOW_COUNT_FLOOR:
        flags = ("low_count: interval wider than half a bit",)
    else:
        flags = ()
    return MeasureEstimate(k / M * mass, int(k), int(M), scheme,
                           (lo * mass, hi * mass), flags)


def bowen_measure(sys: S.SystemDescriptor, x, n: int, eps: float,
                  M: int = 10000, seed: int = 0) -> MeasureEstimate:
    """Monte-Carlo estimate of mu(B(n, x, eps))."""
    if M < 1000:
        raise ValueError("M must be >= 1000")
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must be in (0, 1/2), half the domain diameter")
    x = np.asarray(x, dtype=np.float64)
    if sys.measure in ("lebesgue", "pushforward_square"):
        pts, mass = sample_companion_cube(sys, x, eps, M, seed)
        sep = companion_septimes(sys, x, pts, eps, n)
        return _estimate(int((sep > n).sum()), M, "ball-importance", mass)
    pts = S.sample_measure(sys, M, seed)
    sep = companion_septimes(sys, x, pts, eps, n)
    return _estimate(int((sep > n).sum()), M, "global", 1.0)


def bk_series(sys: S.SystemDescriptor, x, eps: float, gauge: GaugeFn,
              n_grid: Sequence[int], M: int = 100000,
              seed: int = 0) -> BkSeries:
    """Local entropy ratio series on one fixed sample.

    The sample is drawn once and reused for every n, so companion sets are
    exactly nested along the grid.
    """
    n_grid = np.asarray(n_grid, dtype=np.int64)
    if np.any(np.diff(n_grid) <= 0):
        raise ValueError("n_grid must be strictly increasing")
    if n_grid[0] < gauge.min_n():
        raise ValueError(f"gauge {gauge.label} needs n >= {gauge.min_n()}")
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must be in (0, 1/2), half the domain diameter")
    x = np.asarray(x, dtype=np.float64)
    n_max = int(n_grid[-1])
    if sys.measure in ("lebesgue", "pushforward_square"):
        pts, mass = sample_companion_cube(sys, x, eps, M, seed)
        scheme = "ball-importance"
        k0 = M
    else:
        pts = S.sample_measure(sys, M, seed)
        scheme = "global"
        mass = 1.0
        k0 = None
    sep = companion_septimes(sys, x, pts, eps, n_max)
    if k0 is None:
        k0 = int((sep > 0).sum())
        if k0 == 0:
            raise ValueError("no companions at depth 0; raise M or eps")
    ests = []
    ratios = np.empty(n_grid.size)
    cens = np.zeros(n_grid.size, dtype=bool)
    for i, n in enumerate(n_grid):
        k = int((sep > n).sum())
        ests.append(_estimate(k, M, scheme, mass))
        if k == 0:
            ratios[i] = np.nan
            cens[i] = True
        else:
            ratios[i] = -math.log2(k / k0) / gauge(int(n))
    return BkSeries(gauge, n_grid, ests, ratios, cens, k0, eps, x)


# ---------------------------------------------------------------------------
# dimension estimators
# ---------------------------------------------------------------------------

def _dist_to_point(sys: S.SystemDescriptor, pts: np.ndarray,
                   y: np.ndarray) -> np.ndarray:
    d = np.zeros(pts.shape[0])
    for c, w in enumerate(sys.metric.wrap):
        dc = np.abs(pts[:, c] - y[c])
        if w:
            dc = dc % 1.0
            dc = np.where(dc > 0.5, 1.0 - dc, dc)
        d = np.maximum(d, dc)
    return d


def local_dimension(sys: S.SystemDescriptor, x, r_grid: Sequence[float],
                    M: int = 200000, seed: int = 0,
                    min_count: int = 10) -> float:
    """Slope of log2 mu(B_r(x)) against log2 r.

    r_grid should be geometric and span at least two decades.  Radii whose
    companion count falls below min_count are dropped from the fit (the
    window shrinks rather than extrapolating into noise).
    """
    r_grid = np.sort(np.asarray(r_grid, dtype=np.float64))
    if r_grid[-1] / r_grid[0] < 99.0:
        raise ValueError("r_grid must span at least two decades")
    x = np.asarray(x, dtype=np.float64)
    pts = S.sample_measure(sys, M, seed)
    d = _dist_to_point(sys, pts, x)
    ks = np.array([(d <= r).sum() for r in r_grid], dtype=np.int64)
    ok = ks >= min_count
    if ok.sum() < 3:
        raise ValueError("not enough usable radii; raise M")
    slope = np.polyfit(np.log2(r_grid[ok]), np.log2(ks[ok] / M), 1)[0]
    return float(slope)


def _seg_dist(px: np.ndarray, py: np.ndarray, a, b) -> np.ndarray:
    """Euclidean-parameter projection onto segment a-b, sup-metric distance."""
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    vv = vx * vx + vy * vy
    if vv == 0.0:
        qx, qy = np.full_like(px, ax), np.full_like(py, ay)
    else:
        t = np.clip(((px - ax) * vx + (py - ay) * vy) / vv, 0.0, 1.0)
        qx, qy = ax + t * vx, ay + t * vy
    return np.maximum(np.abs(px - qx), np.abs(py - qy))


def _dist_to_set(sys: S.SystemDescriptor, pts: np.ndarray, Y: dict):
    """Distance from each sample to a union of points, vertical circles and
    segments.

    Y = {"points": (k, d) array, "vlines": [c, ...], "segments":
    [((x1, y1), (x2, y2)), ...]}.  Vertical circles are the sets x = c.
    Segments are unwrapped across the torus by testing the 3 x 3 shifted
    copies when coordinates wrap.  All distances exact in the sup metric.
    """
    best = np.full(pts.shape[0], np.inf)
    for y in np.atleast_2d(Y.get("points", np.empty((0, sys.dim)))):
        best = np.minimum(best, _dist_to_point(sys, pts, np.asarray(y)))
    for c in Y.get("vlines", ()):
        dc = np.abs(pts[:, 0] - c)
        if sys.metric.wrap[0]:
            dc = dc % 1.0
            dc = np.where(dc > 0.5, 1.0 - dc, dc)
        best = np.minimum(best, dc)
    for a, b in Y.get("segments", ()):
        sx = (-1, 0, 1) if sys.metric.wrap[0] else (0,)
        sy = (-1, 0, 1) if sys.metric.wrap[1] else (0,)
        for ox in sx:
            for oy in sy:
                best = np.minimum(best, _seg_dist(
                    pts[:, 0] + ox, pts[:, 1] + oy, a, b))
    return best


def set_lower_dimension(sys: S.SystemDescriptor, Y: dict,
                        r_grid: Sequence[float], M: int = 200000,
                        seed: int = 0, min_count: int = 10,
                        window: int = 4) -> float:
    """liminf proxy for log2 mu(B_r(Y)) / log2 r: the minimum slope over
    sliding windows of the given length."""
    r_grid = np.sort(np.asarray(r_grid, dtype=np.float64))
    pts = S.sample_measure(sys, M, seed)
    d = _dist_to_set(sys, pts, Y)
    ks = np.array([(d <= r).sum() for r in r_grid], dtype=np.int64)
    ok = np.flatnonzero(ks >= min_count)
    if ok.size < window:
        raise ValueError("not enough usable radii; raise M")
    lr = np.log2(r_grid)
    lk = np.log2(ks[ok] / M)
    slopes = []
    for a in range(ok.size - window + 1):
        take = ok[a:a + window]
        slopes.append(np.polyfit(lr[take], lk[a:a + window], 1)[0])
    return float(min(slopes))


@dataclass(frozen=True)
class IsometryBoundReport:
    bound: Optional[float]      # d_mu(x) / d-lower_mu(Y); None without Y
    local_dim: float
    set_dim: Optional[float]
    measured_log_slope: float
    flags: tuple[str, ...] = ()


def pi_complexity_bound(sys: S.SystemDescriptor, x, Y: Optional[dict],
                        r_grid: Sequence[float], eps: float,
                        n_grid: Sequence[int], M: int = 200000,
                        seed: int = 0) -> IsometryBoundReport:
    """Predicted log-gauge complexity bound for a piecewise isometry,
    next to the measured local-entropy slope.

    The bound is local_dimension(x) / set_lower_dimension(Y) where Y is the
    discontinuity set.  With no discontinuities (pure isometries) there is
    no sensitivity source; the bound does not apply and the measured slope
    is reported on its own.
    """
    ld = local_dimension(sys, x, r_grid, M=M, seed=seed)
    bk = bk_series(sys, x, eps, GaugeFn("log2"), n_grid, M=M, seed=seed + 1)
    slope = bk.tail_fit().slope
    if not Y or (len(Y.get("vlines", ())) == 0
                 and np.size(Y.get("points", ())) == 0):
        return IsometryBoundReport(None, ld, None, slope,
                                   ("no discontinuity set",))
    sd = set_lower_dimension(sys, Y, r_grid, M=M, seed=seed + 2)
    if sd <= 0.0:
        raise ValueError("set dimension estimate is 0; bound undefined")
    return IsometryBoundReport(ld / sd, ld, sd, slope)
