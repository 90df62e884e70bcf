"""Interval-exchange analysis: discontinuities of powers, gap records,
and orbit approach rates to a target set.

Arithmetic runs in either fast float64 (with 1e-12 guard bands for
collision detection; translation-only dynamics keeps float error linear in
n) or exact Fraction mode when every length is rational.
"""

from __future__ import annotations

import math
from bisect import bisect_left, insort
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import bowen as B
from . import kernels as K
from . import systems as S

Number = Union[float, Fraction]

_FLOAT_COLLISION = 1e-12


@dataclass(frozen=True)
class IetSpec:
    lengths: tuple
    permutation: tuple[int, ...]

    def __post_init__(self):
        m = len(self.lengths)
        if sorted(self.permutation) != list(range(1, m + 1)):
            raise ValueError("permutation must be a bijection of 1..m")
        if self.exact:
            if sum(self.lengths, Fraction(0)) != 1:
                raise ValueError("exact lengths must sum to 1")
        else:
            if abs(math.fsum(float(v) for v in self.lengths) - 1.0) > 1e-15:
                raise ValueError("lengths must sum to 1 within 1e-15")
        if any(v <= 0 for v in self.lengths):
            raise ValueError("lengths must be positive")

    @property
    def m(self) -> int:
        return len(self.lengths)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.lengths)

    def layout(self):
        """(breakpoints b_0..b_m, translations t_0..t_{m-1})."""
        return S.iet_layout(self.lengths, self.permutation)

    def system(self) -> S.SystemDescriptor:
        return S.make_iet([float(v) for v in self.lengths],
                          self.permutation)


def from_system(sys: S.SystemDescriptor) -> IetSpec:
    if sys.kind != K.KIND_IET:
        raise ValueError("system is not an interval exchange")
    return IetSpec(tuple(sys.extra["lengths"]),
                   tuple(sys.extra["permutation"]))


def rotation_spec(gamma: Number) -> IetSpec:
    """Circle rotation by gamma as the 2-IET ((1-gamma, gamma), (2, 1))."""
    one = Fraction(1) if isinstance(gamma, Fraction) else 1.0
    return IetSpec((one - gamma, gamma), (2, 1))


def random_spec(m: int, seed: int, permutation: Optional[Sequence[int]]
                = None) -> IetSpec:
    """Seeded length generator (flat Dirichlet); default permutation is the
    full reversal, which keeps a 3-IET irreducible."""
    lengths = S.rng_for(seed).dirichlet(np.ones(m))
    # exact unit sum after float rounding
    lengths = lengths / math.fsum(lengths)
    lengths[-1] = 1.0 - math.fsum(lengths[:-1])
    perm = tuple(permutation) if permutation else tuple(range(m, 0, -1))
    return IetSpec(tuple(float(v) for v in lengths), perm)


# ---------------------------------------------------------------------------
# inverse-map tables
# ---------------------------------------------------------------------------

def _inverse_table(spec: IetSpec):
    """Sorted image-interval starts and the translation to undo on each."""
    breaks, trans = spec.layout()
    starts = [breaks[j] + trans[j] for j in range(spec.m)]
    order = sorted(range(spec.m), key=lambda j: starts[j])
    return [starts[j] for j in order], [trans[j] for j in order]


def _inv_apply_exact(starts, shifts, y: Fraction) -> Fraction:
    k = bisect_left(starts, y)
    if k == len(starts) or starts[k] != y:
        k -= 1
    return y - shifts[k]


def _inv_apply_float(starts: np.ndarray, shifts: np.ndarray,
                     ys: np.ndarray) -> np.ndarray:
    k = np.searchsorted(starts, ys, side="right") - 1
    return ys - shifts[k]


# ---------------------------------------------------------------------------
# discontinuity sets and gaps
# ---------------------------------------------------------------------------

def power_discontinuities(spec: IetSpec, n: int):
    """Discontinuity points of T^n: the union of T^{-i} of the interior
    breakpoints over i < n, deduplicated and sorted.  Fraction lists stay
    exact; float specs return an ndarray."""
    if n < 1:
        raise ValueError("n must be >= 1")
    breaks, _ = spec.layout()
    interior = breaks[1:-1]
    starts, shifts = _inverse_table(spec)
    if spec.exact:
        seen = set(interior)
        layer = list(interior)
        for _ in range(n - 1):
            layer = [_inv_apply_exact(starts, shifts, y) for y in layer]
            seen.update(layer)
        return sorted(seen)
    starts_a = np.asarray(starts, dtype=np.float64)
    shifts_a = np.asarray(shifts, dtype=np.float64)
    layer = np.asarray(interior, dtype=np.float64)
    out = [layer]
    for _ in range(n - 1):
        layer = _inv_apply_float(starts_a, shifts_a, layer)
        out.append(layer)
    pts = np.sort(np.concatenate(out))
    keep = np.ones(pts.size, dtype=bool)
    keep[1:] = np.diff(pts) > _FLOAT_COLLISION
    return pts[keep]


def _circular_gaps(pts, interval_mode: bool):
    if interval_mode:
        seq = [0 * pts[0]] + list(pts) + [pts[0] * 0 + 1]
        return [b - a for a, b in zip(seq, seq[1:])]
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    gaps.append(pts[0] + 1 - pts[-1])
    return gaps


def delta(spec: IetSpec, n: int, include_endpoints: bool = False):
    """Minimal gap between discontinuities of T^n; circular by default,
    with 0 and 1 added as boundaries in endpoint mode."""
    pts = power_discontinuities(spec, n)
    if len(pts) == 0:
        return 1.0
    if len(pts) == 1 and not include_endpoints:
        return float(1) if not spec.exact else Fraction(1)
    gaps = _circular_gaps(list(pts), include_endpoints)
    g = min(gaps)
    return g if spec.exact else float(g)


@dataclass
class PScanReport:
    n_max: int
    records: list          # (n, delta, C) at every new running max of C_n
    tail_records: list     # records with n >= tail_start
    tail_start: int
    c_star: float          # min C over tail records (0 when empty)
    evidenced: bool
    flags: tuple[str, ...] = ()

    def record_ns(self) -> np.ndarray:
        return np.array([r[0] for r in self.records], dtype=np.int64)


def property_P_scan(spec: IetSpec, n_max: int,
                    floor: float = 1e-4) -> PScanReport:
    """Scan C_n = delta(n) * n and report the largest constant evidenced on
    the deep part of the scan.

    delta(n) is a step function of n, so C_n rises linearly on each plateau
    and the interesting values are the plateau peaks: C at the last n before
    each gap refinement (plus the truncated final plateau).  Those peaks are
    the returned records; C* is their minimum over [sqrt(n_max), n_max], so
    delta(n_k) >= C*/n_k holds along that record subsequence.  A finite scan
    can only ever be evidence for the infinite-sequence property, never
    verification.
    """
    if n_max < 16:
        raise ValueError("n_max must be >= 16")
    breaks, _ = spec.layout()
    interior = [float(v) for v in breaks[1:-1]]
    starts, shifts = _inverse_table(spec)
    starts_a = np.asarray([float(v) for v in starts])
    shifts_a = np.asarray([float(v) for v in shifts])
    pts: list[float] = []
    dmin = 1.0
    collided = False

    def insert(p: float) -> None:
        nonlocal dmin, collided
        i = bisect_left(pts, p)
        left = pts[i - 1] if i > 0 else pts[-1] - 1.0
        right = pts[i] if i < len(pts) else pts[0] + 1.0
        if min(p - left, right - p) < _FLOAT_COLLISION:
            collided = True
            return
        insort(pts, p)
        dmin = min(dmin, p - left, right - p)

    layer = np.asarray(interior, dtype=np.float64)
    for p in layer:
        if pts:
            insert(float(p))
        else:
            pts.append(float(p))
    records = []
    flags: list[str] = []
    prev_d = 0.0 if collided else dmin
    for n in range(2, n_max + 1):
        layer = _inv_apply_float(starts_a, shifts_a, layer)
        was_collided = collided
        for p in layer:
            insert(float(p))
        d = 0.0 if collided else dmin
        if d < prev_d:
            records.append((n - 1, prev_d, prev_d * (n - 1)))
        if collided and not was_collided:
            flags.append(f"collision at n={n}; delta pinned to 0")
        prev_d = d
    records.append((n_max, prev_d, prev_d * n_max))
    tail_start = math.isqrt(n_max)
    tail = [r for r in records if r[0] >= tail_start]
    c_star = min((r[2] for r in tail), default=0.0)
    evidenced = bool(tail) and c_star >= floor
    if not evidenced:
        flags.append("P-tilde not evidenced at this depth")
    return PScanReport(n_max, records, tail, tail_start, float(c_star),
                       evidenced, tuple(flags))


# ---------------------------------------------------------------------------
# approach rate to a target set
# ---------------------------------------------------------------------------

@dataclass
class ApproachReport:
    alpha: float
    n: np.ndarray              # checkpoint grid
    m: np.ndarray              # running min_{1<=i<=n} d(T^i x, Y)
    scaled: np.ndarray         # n^alpha * m(n)
    first_decade_median: float
    last_decade_median: float
    classification: str        # grows | bounded | decays


def _checkpoint_grid(n_max: int, per_decade: int = 16) -> np.ndarray:
    decades = int(math.ceil(math.log10(n_max)))
    g = np.unique(np.round(np.logspace(0, decades, decades * per_decade + 1))
                  .astype(np.int64))
    return g[(g >= 1) & (g <= n_max)]


def approach_rate(sys: S.SystemDescriptor, x, Y: dict, n_max: int,
                  alpha: float, per_decade: int = 16,
                  chunk: int = 65536) -> ApproachReport:
    """Running minimum distance of the orbit to Y and its n^alpha scaling.

    Classification compares the first- and last-decade medians of
    n^alpha * m(n): ratio >= 10 is "grows", <= 1/10 is "decays", otherwise
    "bounded".  An exact hit of Y is an error naming the hit time.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    grid = _checkpoint_grid(n_max, per_decade)
    m_at = np.empty(grid.size)
    best = math.inf
    gi = 0
    t = 0
    cur = x.copy()
    while t < n_max and gi < grid.size:
        steps = min(chunk, n_max - t)
        if sys.dim == 1:
            orb = K.orbit1(sys.kind, sys.params, float(cur[0]), steps)
            pts = orb[1:].reshape(-1, 1)
            cur = orb[-1:].copy()
        else:
            orb = K.orbit2(sys.kind, sys.params, float(cur[0]),
                           float(cur[1]), steps)
            pts = orb[1:]
            cur = orb[-1].copy()
        d = B._dist_to_set(sys, pts, Y)
        hit = np.flatnonzero(d < 1e-15)
        if hit.size:
            raise ValueError(f"orbit hits the target set at time "
                             f"{t + 1 + int(hit[0])}")
        runmin = np.minimum.accumulate(d)
        runmin = np.minimum(runmin, best)
        while gi < grid.size and grid[gi] <= t + steps:
            m_at[gi] = runmin[grid[gi] - t - 1]
            gi += 1
        best = float(runmin[-1])
        t += steps
    scaled = grid.astype(np.float64) ** alpha * m_at
    lo_dec = grid <= grid[0] * 10
    hi_dec = grid >= grid[-1] / 10
    first = float(np.median(scaled[lo_dec]))
    last = float(np.median(scaled[hi_dec]))
    if last >= 10.0 * first:
        cls = "grows"
    elif last <= 0.1 * first:
        cls = "decays"
    else:
        cls = "bounded"
    return ApproachReport(alpha, grid, m_at, scaled, first, last, cls)
