"""Ratio series, tail limsup/liminf proxies, and gauge slope fits.

A limsup over n is never reachable numerically; the declared stand-in
everywhere is the max (resp. min) of the ratio sequence over the last W grid
points, with W = 8 by default.  Slope fits are ordinary least squares of the
log-counts (or minus log-measures) against the gauge values f(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

DEFAULT_W = 8


@dataclass(frozen=True)
class GaugeFn:
    """Monotone unbounded comparison scale: n, log2 n, or n**alpha."""

    kind: str  # identity | log2 | power
    alpha: float = 1.0

    def __call__(self, n):
        n = np.asarray(n, dtype=np.float64)
        if self.kind == "identity":
            out = n
        elif self.kind == "log2":
            out = np.log2(n)
        elif self.kind == "power":
            out = n ** self.alpha
        else:
            raise ValueError(f"unknown gauge {self.kind!r}")
        return float(out) if out.ndim == 0 else out

    @property
    def label(self) -> str:
        if self.kind == "power":
            return f"power:{self.alpha:g}"
        return self.kind

    def min_n(self) -> int:
        # log2 needs n >= 2 so that f(n) > 0 stays a valid divisor
        return 2 if self.kind == "log2" else 1


def parse_gauge(text: str) -> GaugeFn:
    text = text.strip()
    if text in ("identity", "id", "n"):
        return GaugeFn("identity")
    if text in ("log2", "log"):
        return GaugeFn("log2")
    if text.startswith("power:"):
        a = float(text.split(":", 1)[1])
        if a <= 0:
            raise ValueError("power gauge needs alpha > 0")
        return GaugeFn("power", a)
    raise ValueError(f"unknown gauge {text!r}")


GAUGES = {"identity": GaugeFn("identity"), "log2": GaugeFn("log2")}


@dataclass
class RatioSeries:
    """Pairs (n, r(n)) with per-point censoring flags."""

    n: np.ndarray
    ratio: np.ndarray
    censored: np.ndarray  # bool; censored points carry no usable ratio
    gauge: GaugeFn

    def valid(self) -> np.ndarray:
        return ~self.censored


def tail_proxies(series: RatioSeries, W: int = DEFAULT_W):
    """(limsup proxy, liminf proxy): max/min of r over the last W usable
    points.  Censored points shrink the window from the left; at least one
    usable point is required."""
    if W < 3:
        raise ValueError("W must be >= 3")
    ok = np.flatnonzero(series.valid())
    if ok.size == 0:
        raise ValueError("all points censored")
    take = ok[-min(W, ok.size):]
    vals = series.ratio[take]
    return float(vals.max()), float(vals.min())


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    window: tuple[int, int]  # [start, stop) indices into the series
    npoints: int


def fit_slope(xs: Sequence[float], ys: Sequence[float],
              window: Optional[tuple[int, int]] = None) -> SlopeFit:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if window is None:
        window = (0, xs.size)
    a, b = window
    x = xs[a:b]
    y = ys[a:b]
    if x.size < 3:
        raise ValueError("need at least 3 points in the fitting window")
    if float(x.max() - x.min()) == 0.0:
        raise ValueError("degenerate abscissae: all f(n) equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return SlopeFit(float(slope), float(intercept), r2, (int(a), int(b)),
                    int(x.size))


def tail_slope(ns: np.ndarray, ys: np.ndarray, gauge: GaugeFn,
               keep: Optional[np.ndarray] = None,
               W: int = DEFAULT_W) -> SlopeFit:
    """Slope over the last W usable points, in gauge coordinates."""
    ns = np.asarray(ns, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if keep is None:
        keep = np.ones(ns.shape, dtype=bool)
    ok = np.flatnonzero(keep)
    take = ok[-min(W, ok.size):]
    if take.size < 3:
        raise ValueError("fewer than 3 usable points in the tail window")
    return fit_slope(gauge(ns[take]), ys[take])


def gauge_scan(ns: np.ndarray, ys: np.ndarray,
               gauges: Sequence[GaugeFn],
               keep: Optional[np.ndarray] = None) -> dict:
    """Refit the same data under several gauges; highest R^2 wins.

    ys should be log2 counts or minus log2 measures.  Systems whose counts
    stop growing come out with all slopes near zero; they are classified as
    complexity-trivial rather than assigned a gauge.
    """
    ns = np.asarray(ns, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if keep is None:
        keep = np.ones(ns.shape, dtype=bool)
    report = {}
    best = None
    spread = float(ys[keep].max() - ys[keep].min()) if keep.any() else 0.0
    for g in gauges:
        fit = fit_slope(g(ns[keep]), ys[keep])
        report[g.label] = fit
        if best is None or fit.r2 > report[best].r2:
            best = g.label
    return {
        "fits": report,
        "best": "bounded" if spread < 1.0 else best,
    }


def n_grid_geometric(n_min: int, n_max: int,
                     ratio: float = math.sqrt(2.0)) -> np.ndarray:
    """Geometric grid, rounded to integers, deduplicated, endpoints kept."""
    if not (1 <= n_min < n_max):
        raise ValueError("need 1 <= n_min < n_max")
    if ratio <= 1.0:
        raise ValueError("ratio must exceed 1")
    vals = [n_min]
    x = float(n_min)
    while True:
        x *= ratio
        v = int(round(x))
        if v >= n_max:
            break
        if v > vals[-1]:
            vals.append(v)
    vals.append(n_max)
    return np.array(vals, dtype=np.int64)


def n_grid_linear(n_min: int, n_max: int, step: int = 1) -> np.ndarray:
    if not (0 <= n_min <= n_max) or step < 1:
        raise ValueError("bad linear grid")
    return np.arange(n_min, n_max + 1, step, dtype=np.int64)
