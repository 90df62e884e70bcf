"""Minimal SVG line plots.  Convenience artifacts only: the CSVs are the
record, so this stays at axes, ticks, polylines and a legend."""

from __future__ import annotations

import math
from typing import Sequence

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 180, 40, 55
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f")


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 5 * mag, 10 * mag) if s >= raw)
    t0 = math.ceil(lo / step) * step
    out = []
    t = t0
    while t <= hi + 1e-12 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_plot(series: Sequence[tuple], path, title: str = "",
              xlabel: str = "n", ylabel: str = "ratio (bits)",
              logx: bool = True) -> None:
    """series: iterable of (label, xs, ys); NaNs break the polyline."""
    pts = []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y) and (x > 0 or not logx):
                pts.append((math.log10(x) if logx else x, y))
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    xlo = min(p[0] for p in pts)
    xhi = max(p[0] for p in pts)
    ylo = min(p[1] for p in pts)
    yhi = max(p[1] for p in pts)
    if xhi - xlo < 1e-12:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    if yhi - ylo < 1e-12:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def tx(x: float) -> float:
        return _ML + pw * (x - xlo) / (xhi - xlo)

    def ty(y: float) -> float:
        return _MT + ph * (yhi - y) / (yhi - ylo)

    e = []
    e.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
             f'height="{_H}" viewBox="0 0 {_W} {_H}">')
    e.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    e.append(f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
             f'font-size="15" font-family="sans-serif">{title}</text>')
    ax = (f'stroke="#333" stroke-width="1"')
    e.append(f'<line x1="{_ML}" y1="{_MT + ph}" x2="{_ML + pw}" '
             f'y2="{_MT + ph}" {ax}/>')
    e.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + ph}" '
             f'{ax}/>')
    for t in _ticks(xlo, xhi):
        px = tx(t)
        e.append(f'<line x1="{px:.1f}" y1="{_MT + ph}" x2="{px:.1f}" '
                 f'y2="{_MT + ph + 5}" {ax}/>')
        lab = _fmt(10.0 ** t) if logx else _fmt(t)
        e.append(f'<text x="{px:.1f}" y="{_MT + ph + 18}" '
                 f'text-anchor="middle" font-size="11" '
                 f'font-family="sans-serif">{lab}</text>')
    for t in _ticks(ylo, yhi):
        py = ty(t)
        e.append(f'<line x1="{_ML - 5}" y1="{py:.1f}" x2="{_ML}" '
                 f'y2="{py:.1f}" {ax}/>')
        e.append(f'<text x="{_ML - 9}" y="{py + 4:.1f}" text-anchor="end" '
                 f'font-size="11" font-family="sans-serif">{_fmt(t)}</text>')
    e.append(f'<text x="{_ML + pw / 2:.1f}" y="{_H - 12}" '
             f'text-anchor="middle" font-size="13" '
             f'font-family="sans-serif">{xlabel}</text>')
    e.append(f'<text x="18" y="{_MT + ph / 2:.1f}" text-anchor="middle" '
             f'font-size="13" font-family="sans-serif" '
             f'transform="rotate(-90 18 {_MT + ph / 2:.1f})">{ylabel}</text>')
    for i, (label, xs, ys) in enumerate(series):
        col = _COLORS[i % len(_COLORS)]
        seg: list[str] = []
        parts = []
        for x, y in zip(xs, ys):
            ok = (math.isfinite(x) and math.isfinite(y)
                  and (x > 0 or not logx))
            if not ok:
                if seg:
                    parts.append(seg)
                seg = []
                continue
            xx = math.log10(x) if logx else x
            seg.append(f"{tx(xx):.1f},{ty(y):.1f}")
        if seg:
            parts.append(seg)
        for part in parts:
            if len(part) == 1:
                cx, cy = part[0].split(",")
                e.append(f'<circle cx="{cx}" cy="{cy}" r="2.5" '
                         f'fill="{col}"/>')
            else:
                e.append(f'<polyline points="{" ".join(part)}" fill="none" '
                         f'stroke="{col}" stroke-width="1.6"/>')
        ly = _MT + 14 + 16 * i
        e.append(f'<line x1="{_ML + pw + 10}" y1="{ly - 4}" '
                 f'x2="{_ML + pw + 34}" y2="{ly - 4}" stroke="{col}" '
                 f'stroke-width="1.6"/>')
        e.append(f'<text x="{_ML + pw + 39}" y="{ly}" font-size="11" '
                 f'font-family="sans-serif">{label}</text>')
    e.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(e) + "\n")
