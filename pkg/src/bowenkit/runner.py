"""Batch experiment runner: config in, results.csv + ratios.svg +
manifest.json out.

The CSV schema is fixed (header below, 12 significant digits); every
experiment kind maps its quantities onto it, with kind-specific notes in
the README.  Worker parallelism only fans out independent units (epsilon,
gauge, start point) and results are reassembled in unit order, so the CSV
bytes never depend on the worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import arithmetic as A
from . import bowen as B
from . import covering as C
from . import exponents as E
from . import iet as I
from . import plotsvg
from . import scaling as SC
from . import systems as S
from ._version import __version__
from .config import ExperimentConfig, parse_config

CSV_HEADER = ("experiment, system, epsilon, eps_prime, n, f_of_n, "
              "N_hat or mu_hat, ratio_bits, ci_lo, ci_hi, flags")


class ResolutionError(RuntimeError):
    """The configured numerics cannot resolve the quantity (for example a
    universal underflow: no companions at any n)."""


@dataclass
class Row:
    epsilon: Optional[float] = None
    eps_prime: Optional[float] = None
    n: Optional[int] = None
    f_of_n: Optional[float] = None
    value: Optional[float] = None
    ratio: Optional[float] = None
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None
    flags: tuple = ()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and not math.isfinite(v):
        return ""
    return f"{v:.12g}"


def _render_csv(experiment: str, system: str, rows: list) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        flags = ";".join(str(f).replace(",", ";") for f in r.flags)
        lines.append(", ".join([
            experiment, system, _cell(r.epsilon), _cell(r.eps_prime),
            _cell(r.n), _cell(r.f_of_n), _cell(r.value), _cell(r.ratio),
            _cell(r.ci_lo), _cell(r.ci_hi), flags]))
    return "\n".join(lines) + "\n"


def _parallel(units: list, fn, workers: int) -> list:
    if workers <= 1 or len(units) <= 1:
        return [fn(u) for u in units]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, units))


def _center(cfg: ExperimentConfig, sys: S.SystemDescriptor,
            seed: int) -> np.ndarray:
    if cfg.center is not None:
        x = np.asarray(cfg.center, dtype=np.float64)
        if x.size != sys.dim:
            raise ResolutionError(f"center has {x.size} coordinates, "
                                  f"system is {sys.dim}-d")
        return x
    return S.sample_measure(sys, 1, seed)[0]


def _maybe(x: float) -> Optional[float]:
    return float(x) if math.isfinite(x) else None


# ---------------------------------------------------------------------------
# kind executors: each returns (rows, plot series)
# ---------------------------------------------------------------------------

def _fit_flag(fit_fn) -> tuple:
    try:
        fit = fit_fn()
        return (f"tail_slope={fit.slope:.6g}", f"r2={fit.r2:.6g}")
    except ValueError:
        return ("tail fit unavailable",)


def _bk_rows(bk: B.BkSeries, base_flags: tuple = (),
             first_flags: tuple = ()) -> list:
    rows = []
    for i, n in enumerate(bk.n):
        est = bk.estimates[i]
        fl = base_flags + (first_flags if i == 0 else ()) + tuple(est.flags)
        if bk.censored[i]:
            fl = fl + ("censored",)
        rows.append(Row(epsilon=bk.eps, n=int(n),
                        f_of_n=bk.gauge(int(n)), value=est.value,
                        ratio=_maybe(bk.ratio[i]), ci_lo=est.ci[0],
                        ci_hi=est.ci[1], flags=fl))
    return rows


def _run_bk_series(cfg, sys, seed, workers):
    x = _center(cfg, sys, seed)
    units = [(e, g) for e in cfg.epsilon for g in cfg.gauges]

    def work(unit):
        e, g = unit
        return B.bk_series(sys, x, e, SC.parse_gauge(g), cfg.n_grid,
                           M=cfg.M, seed=seed)

    results = _parallel(units, work, workers)
    rows, series = [], []
    for (e, g), bk in zip(units, results):
        rows.extend(_bk_rows(bk, first_flags=_fit_flag(
            lambda: bk.tail_fit(cfg.W))))
        series.append((f"eps={e:g} {g}", list(map(int, bk.n)),
                       [r if math.isfinite(r) else math.nan
                        for r in bk.ratio]))
    if all(est.k == 0 for bk in results for est in bk.estimates):
        raise ResolutionError("universal underflow: no companions at any "
                              "n; raise M or lower n")
    return rows, series


def _run_complexity_curve(cfg, sys, seed, workers):
    units = [(e, g) for e in cfg.epsilon for g in cfg.gauges]

    def work(unit):
        e, g = unit
        return C.complexity_curve(sys, cfg.M, cfg.n_grid, e, cfg.eps_prime,
                                  SC.parse_gauge(g), seed=seed)

    results = _parallel(units, work, workers)
    rows, series = [], []
    for (e, g), cur in zip(units, results):
        head = _fit_flag(lambda: cur.tail_fit(cfg.W))
        for i, n in enumerate(cur.n):
            res = cur.results[i]
            fl = (head if i == 0 else ()) + tuple(res.flags)
            rows.append(Row(epsilon=e, eps_prime=cfg.eps_prime, n=int(n),
                            f_of_n=cur.gauge(int(n)), value=res.count,
                            ratio=_maybe(cur.ratio[i]),
                            flags=fl))
        series.append((f"eps={e:g} {g}", list(map(int, cur.n)),
                       list(cur.ratio)))
    return rows, series


def _run_exponents(cfg, sys, seed, workers):
    x = _center(cfg, sys, seed)
    units = [(e, g) for e in cfg.epsilon for g in cfg.gauges]

    def work(unit):
        e, g = unit
        return E.exponent_series(sys, x, e, SC.parse_gauge(g), cfg.n_grid,
                                 M=cfg.M, seed=seed)

    results = _parallel(units, work, workers)
    rows, series = [], []
    for (e, g), ser in zip(units, results):
        first = True
        for i, t in enumerate(ser.t):
            for k in range(len(ser.enclosing[i].sides)):
                fl = (f"enclosing side {k + 1}",)
                if first:
                    fl = fl + tuple(ser.flags)
                    first = False
                rows.append(Row(epsilon=e, n=int(t),
                                f_of_n=ser.gauge(int(t)),
                                value=ser.enclosing[i].sides[k],
                                ratio=_maybe(ser.enc_ratio[i, k]),
                                flags=fl))
            for k in range(len(ser.inscribed[i].sides)):
                rows.append(Row(epsilon=e, n=int(t),
                                f_of_n=ser.gauge(int(t)),
                                value=ser.inscribed[i].sides[k],
                                ratio=_maybe(ser.ins_ratio[i, k]),
                                flags=(f"inscribed side {k + 1}",)))
        ts = list(map(int, ser.t))
        for k in range(ser.enc_ratio.shape[1]):
            series.append((f"eps={e:g} {g} enc l{k + 1}", ts,
                           list(ser.enc_ratio[:, k])))
            series.append((f"eps={e:g} {g} ins L{k + 1}", ts,
                           list(ser.ins_ratio[:, k])))
    return rows, series


def _run_iet_scan(cfg, sys, seed, workers):
    rep = I.property_P_scan(I.from_system(sys), int(cfg.n_grid[-1]))
    rows = []
    for j, (n, d, c) in enumerate(rep.records):
        fl: tuple = ("record",)
        if j == 0:
            fl = fl + (f"c_star={rep.c_star:.6g}",
                       f"tail_start={rep.tail_start}") + tuple(rep.flags)
            if rep.evidenced:
                fl = fl + ("evidenced",)
        rows.append(Row(n=int(n), value=d, ratio=c, flags=fl))
    series = [("n*delta(n) records", [r[0] for r in rep.records],
               [r[2] for r in rep.records])]
    return rows, series


def _run_bk_gap(cfg, sys, seed, workers):
    xs = S.sample_measure(sys, cfg.starts, seed)
    gauge = SC.parse_gauge(cfg.gauges[0])
    units = list(range(cfg.starts))

    def work(i):
        return B.bk_series(sys, xs[i], cfg.epsilon[0], gauge, cfg.n_grid,
                           M=cfg.M, seed=seed + 1 + i)

    results = _parallel(units, work, workers)
    rows, series = [], []
    for i, bk in zip(units, results):
        rows.extend(_bk_rows(bk, base_flags=(f"start={i}",)))
        series.append((f"start {i}", list(map(int, bk.n)),
                       [r if math.isfinite(r) else math.nan
                        for r in bk.ratio]))
    return rows, series


def _run_entrance_time(cfg, sys, seed, workers):
    x = cfg.center[0] if cfg.center else float(
        S.sample_measure(sys, 1, seed)[0][0])
    curve = A.entrance_time_curve(sys, x, cfg.target, cfg.radii,
                                  cfg.horizon)
    rows = []
    for j, rec in enumerate(curve.records):
        fl: tuple = ()
        if rec.censored:
            fl = ("censored",)
        if j == 0:
            fl = fl + (f"slope={curve.slope:.6g}",
                       f"max_ratio={curve.max_ratio:.6g}")
            fl = fl + tuple(curve.flags)
        rows.append(Row(epsilon=rec.r, n=rec.tau,
                        f_of_n=-math.log2(rec.r),
                        value=None if rec.tau is None else float(rec.tau),
                        ratio=(None if rec.tau is None else
                               math.log2(rec.tau) / -math.log2(rec.r)),
                        flags=fl))
    if all(rec.censored for rec in curve.records):
        raise ResolutionError("no entrance within the horizon at any "
                              "radius")
    xs = [-math.log2(r.r) for r in curve.records if not r.censored]
    ys = [math.log2(r.tau) for r in curve.records if not r.censored]
    series = [("log2 tau vs -log2 r", xs, ys)]
    return rows, series


def _run_conjugacy_check(cfg, sys, seed, workers):
    if cfg.variant == "rotate":
        other = S.conjugate_rotate(sys, 0.25)
    else:
        other = S.conjugate_square(sys)
    gauge = SC.parse_gauge(cfg.gauges[0])
    units = [(e, s) for e in cfg.epsilon for s in (sys, other)]

    def work(unit):
        e, system = unit
        return C.complexity_curve(system, cfg.M, cfg.n_grid, e,
                                  cfg.eps_prime, gauge, seed=seed)

    results = _parallel(units, work, workers)
    rows, series = [], []
    for (e, system), cur in zip(units, results):
        head = _fit_flag(lambda: cur.tail_fit(cfg.W))
        for i, n in enumerate(cur.n):
            res = cur.results[i]
            fl = (f"variant={system.name}",)
            if i == 0:
                fl = fl + head
            rows.append(Row(epsilon=e, eps_prime=cfg.eps_prime, n=int(n),
                            f_of_n=gauge(int(n)), value=res.count,
                            ratio=_maybe(cur.ratio[i]),
                            flags=fl + tuple(res.flags)))
        series.append((f"eps={e:g} {system.name}", list(map(int, cur.n)),
                       list(cur.ratio)))
    return rows, series


def _run_pesin_check(cfg, sys, seed, workers):
    x = _center(cfg, sys, seed)
    units = [(e, g) for e in cfg.epsilon for g in cfg.gauges]

    def work(unit):
        e, g = unit
        return E.pesin_check(sys, x, e, SC.parse_gauge(g), cfg.n_grid,
                             M=cfg.M, seed=seed, W=cfg.W)

    results = _parallel(units, work, workers)
    rows, series = [], []
    for (e, g), rep in zip(units, results):
        ser = rep.series
        summary = (f"bk_slope={rep.bk_slope:.6g}",
                   f"sum_lower={rep.sum_lower:.6g}",
                   f"sum_upper={rep.sum_upper:.6g}",
                   "holds" if rep.holds else "violated")
        first = True
        for i, t in enumerate(ser.t):
            for k in range(ser.enc_ratio.shape[1]):
                fl = (f"enclosing side {k + 1}",)
                if first:
                    fl = fl + summary + tuple(ser.flags)
                    first = False
                rows.append(Row(epsilon=e, n=int(t),
                                f_of_n=ser.gauge(int(t)),
                                value=ser.enclosing[i].sides[k],
                                ratio=_maybe(ser.enc_ratio[i, k]),
                                flags=fl))
                rows.append(Row(epsilon=e, n=int(t),
                                f_of_n=ser.gauge(int(t)),
                                value=ser.inscribed[i].sides[k],
                                ratio=_maybe(ser.ins_ratio[i, k]),
                                flags=(f"inscribed side {k + 1}",)))
        ts = list(map(int, ser.t))
        for k in range(ser.enc_ratio.shape[1]):
            series.append((f"eps={e:g} enc l{k + 1}", ts,
                           list(ser.enc_ratio[:, k])))
            series.append((f"eps={e:g} ins L{k + 1}", ts,
                           list(ser.ins_ratio[:, k])))
    return rows, series


_EXECUTORS = {
    "bk_series": _run_bk_series,
    "complexity_curve": _run_complexity_curve,
    "exponents": _run_exponents,
    "iet_scan": _run_iet_scan,
    "bk_gap": _run_bk_gap,
    "entrance_time": _run_entrance_time,
    "conjugacy_check": _run_conjugacy_check,
    "pesin_check": _run_pesin_check,
}


@dataclass
class RunManifest:
    config_hash: str
    version: str
    seed: int
    wall_time_s: float
    outputs: dict
    name: str = ""
    kind: str = ""
    workers: int = 1

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def run_config(cfg, outdir, workers: int = 1,
               seed: Optional[int] = None) -> RunManifest:
    """Execute one parsed config, writing results.csv, ratios.svg and
    manifest.json into outdir.  Raises ConfigError or ResolutionError;
    partially written outputs are removed on failure."""
    if isinstance(cfg, (str, Path)):
        cfg = parse_config(cfg)
    eff_seed = cfg.seed if seed is None else int(seed)
    sys = cfg.build_system()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "results.csv"
    svg_path = outdir / "ratios.svg"
    man_path = outdir / "manifest.json"
    t0 = time.perf_counter()
    try:
        rows, series = _EXECUTORS[cfg.kind](cfg, sys, eff_seed, workers)
        csv_text = _render_csv(cfg.name, sys.name, rows)
        csv_path.write_text(csv_text)
        xlab = "-log2 r" if cfg.kind == "entrance_time" else "n"
        plotsvg.line_plot(series, svg_path, title=cfg.name, xlabel=xlab,
                          logx=(cfg.kind != "entrance_time"))
        manifest = RunManifest(
            config_hash=_sha256(cfg.text.encode()),
            version=__version__, seed=eff_seed,
            wall_time_s=round(time.perf_counter() - t0, 3),
            outputs={
                "results.csv": _sha256(csv_text.encode()),
                "ratios.svg": _sha256(svg_path.read_bytes()),
            },
            name=cfg.name, kind=cfg.kind, workers=workers)
        man_path.write_text(manifest.to_json())
        return manifest
    except Exception:
        for p in (csv_path, svg_path, man_path):
            p.unlink(missing_ok=True)
        raise
