"""Number-theoretic support: the tower constant alpha = sum of 2^(-2^(2^n)),
continued fractions with guaranteed-correct quotients, irrational type
estimation, and first-entrance-time statistics.

All exact work runs on Fractions; the tower constant stays a dyadic
rational whose denominator fits comfortably in a bigint for the terms any
realistic precision admits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernels as K
from . import scaling as SC
from . import systems as S

MIN_PRECISION_BITS = 80
MAX_PRECISION_BITS = 1 << 24


def tower_exponent(n: int) -> int:
    """Exponent of the n-th term, 2^(2^(2^n)) evaluated right to left:
    4, 16, 65536, 2^256, 2^65536."""
    if not 0 <= n <= 4:
        raise ValueError("tower exponent out of materializable range")
    return 2 ** (2 ** (2 ** n))


@dataclass(frozen=True)
class HighPrecReal:
    """Exact dyadic value with a declared working precision and a rigorous
    bound on the distance to the limit it truncates."""
    value: Fraction
    precision_bits: int
    truncated: bool = False
    remainder_log2: Optional[int] = None  # |limit - value| < 2**remainder_log2
    notice: str = ""

    def __float__(self) -> float:
        return float(self.value)


def liouville_alpha(k_terms: int, precision_bits: int = 128) -> HighPrecReal:
    """Partial sum of sum_{n>=0} 2^(-2^(2^n)).

    Terms whose exponent exceeds the precision are dropped with a notice;
    the remainder bound always covers the distance to the full series
    (geometric domination: the tail is less than twice its first term).
    """
    if k_terms < 1:
        raise ValueError("k_terms must be >= 1")
    if not MIN_PRECISION_BITS <= precision_bits <= MAX_PRECISION_BITS:
        raise ValueError(f"precision_bits must be in "
                         f"[{MIN_PRECISION_BITS}, {MAX_PRECISION_BITS}]")
    value = Fraction(0)
    notice = ""
    truncated = False
    tail_from = k_terms
    for n in range(min(k_terms, 4)):
        e = tower_exponent(n)
        if e > precision_bits:
            truncated = True
            tail_from = n
            notice = (f"term n={n} needs {e} bits, beyond the declared "
                      f"precision; dropped")
            break
        value += Fraction(1, 2 ** e)
    else:
        if k_terms > 3:
            # term n=3 has exponent 2^256: unrepresentable at any precision
            truncated = True
            tail_from = 3
            notice = "terms from n=3 exceed any materializable precision"
    remainder_log2 = 1 - tower_exponent(min(tail_from, 4))
    return HighPrecReal(value, precision_bits, truncated, remainder_log2,
                        notice)


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CFExpansion:
    quotients: tuple[int, ...]
    terminated: bool            # exact rational fully expanded
    flags: tuple[str, ...] = ()

    def convergents(self) -> list[Fraction]:
        out = []
        h0, h1 = 1, 0
        k0, k1 = 0, 1
        for a in self.quotients:
            h0, h1 = h1, a * h1 + h0
            k0, k1 = k1, a * k1 + k0
            out.append(Fraction(h1, k1))
        return out


def continued_fraction(x, depth: int = 64,
                       slack_bits: int = 48) -> CFExpansion:
    """Partial quotients of x in (0,1), integer part excluded.

    Exact for Fraction or HighPrecReal input.  Float input runs an interval
    Euclid step on [x - 2^-slack, x + 2^-slack] and stops as soon as the two
    endpoints disagree on the next quotient, so every returned quotient is
    guaranteed correct.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(x, HighPrecReal):
        x = x.value
    if isinstance(x, Fraction):
        if not 0 < x < 1:
            raise ValueError("x must be in (0,1)")
        q = []
        r = x
        while r and len(q) < depth:
            a, rem = divmod(r.denominator, r.numerator)
            q.append(a)
            r = Fraction(rem, r.numerator)
        return CFExpansion(tuple(q), terminated=(r == 0))
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError("x must be in (0,1)")
    slack = Fraction(1, 2 ** slack_bits)
    lo, hi = Fraction(x) - slack, Fraction(x) + slack
    q: list[int] = []
    flags: tuple[str, ...] = ()
    while len(q) < depth:
        if lo <= 0:
            flags = (f"precision exhausted after {len(q)} quotients",)
            break
        a_lo = (hi.denominator // hi.numerator if hi < 1 else 0)
        a_hi = lo.denominator // lo.numerator
        a = a_lo
        if a_lo != a_hi or a < 1:
            flags = (f"precision exhausted after {len(q)} quotients",)
            break
        q.append(a)
        lo, hi = 1 / hi - a, 1 / lo - a
    return CFExpansion(tuple(q), terminated=False, flags=flags)


# ---------------------------------------------------------------------------
# irrational type
# ---------------------------------------------------------------------------

def _log2_fraction(fr: Fraction) -> float:
    """log2 of a positive Fraction whose float conversion may underflow."""
    n, d = fr.numerator, fr.denominator
    sh = n.bit_length() - d.bit_length()
    # scale so the integer quotient carries ~64 significant bits
    if sh <= 64:
        scaled = (n << (64 - sh)) // d
    else:
        scaled = (n >> (sh - 64)) // d
    return math.log2(scaled) + sh - 64


@dataclass(frozen=True)
class TypeReport:
    nu_hat: float
    arg_j: int
    j_min: int
    j_max: int
    flags: tuple[str, ...] = ()


def type_estimate(x, j_max: int, j_min: int = 128,
                  precision_bits: int = 128) -> TypeReport:
    """Finite-range proxy for the irrational type:
    max over j in [j_min, j_max] of log(1/||j x||) / log j.

    Small j only measure the first few partial quotients, not the type, so
    the default window starts at 128; pass j_min explicitly to probe lower.
    Exact hits (rational x at a multiple of the denominator) clamp to the
    precision floor and are flagged.
    """
    if j_max < 1000:
        raise ValueError("j_max must be >= 1000")
    if not 2 <= j_min < j_max:
        raise ValueError("need 2 <= j_min < j_max")
    if isinstance(x, HighPrecReal):
        x = x.value
    flags: list[str] = []
    best = -math.inf
    arg = j_min
    if isinstance(x, Fraction):
        p, q = x.numerator, x.denominator
        floor_log2 = -float(precision_bits)
        for j in range(j_min, j_max + 1):
            m = (j * p) % q
            if m == 0:
                flags.append(f"exact hit at j={j}; clamped to the "
                             f"precision floor")
                lg = floor_log2
            else:
                lg = _log2_fraction(Fraction(min(m, q - m), q))
                lg = max(lg, floor_log2)
            val = -lg / math.log2(j)
            if val > best:
                best, arg = val, j
        return TypeReport(float(best), arg, j_min, j_max, tuple(flags))
    x = float(x)
    js = np.arange(j_min, j_max + 1, dtype=np.float64)
    fr = (js * x) % 1.0
    dist = np.minimum(fr, 1.0 - fr)
    tiny = dist < 2.0 ** -52 * js
    if tiny.any():
        flags.append("distance at float noise level; clamped")
        dist = np.maximum(dist, 2.0 ** -52 * js)
    vals = -np.log2(dist) / np.log2(js)
    i = int(np.argmax(vals))
    return TypeReport(float(vals[i]), int(js[i]), j_min, j_max, tuple(flags))


# ---------------------------------------------------------------------------
# first entrance times
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntranceRecord:
    r: float
    tau: Optional[int]          # None when censored
    x: float
    y: float
    censored: bool = False


@dataclass
class EntranceCurve:
    records: list
    slope: float
    r_squared: float
    max_ratio: float            # max over r of log2(tau) / -log2(r)
    max_ratio_r: float
    horizon: int
    flags: tuple[str, ...] = ()


def _entrance_exact_rotation(p: int, q: int, x: Fraction, y: Fraction,
                             radii: Sequence[float], horizon: int):
    """One exact period of x -> x + p/q settles every radius: entrances the
    period misses can never happen."""
    taus: list[Optional[int]] = [None] * len(radii)
    open_i = 0  # radii sorted descending; a hit closes a prefix
    theta = (x - y) % 1
    pos = theta
    step = Fraction(p, q)
    limit = min(horizon, q)
    for n in range(1, limit + 1):
        pos = (pos + step) % 1
        d = min(pos, 1 - pos)
        while open_i < len(radii) and d <= radii[open_i]:
            taus[open_i] = n
            open_i += 1
        if open_i == len(radii):
            break
    return taus, limit


def _entrance_float_rotation(gamma: float, x: float, y: float,
                             radii: Sequence[float], horizon: int,
                             chunk: int = 1 << 20):
    taus: list[Optional[int]] = [None] * len(radii)
    open_i = 0
    theta = (x - y) % 1.0
    t = 0
    while t < horizon and open_i < len(radii):
        steps = min(chunk, horizon - t)
        n = np.arange(t + 1, t + steps + 1, dtype=np.float64)
        fr = (theta + n * gamma) % 1.0
        d = np.minimum(fr, 1.0 - fr)
        while open_i < len(radii):
            hit = d <= radii[open_i]
            if not hit.any():
                break
            taus[open_i] = t + 1 + int(np.argmax(hit))
            open_i += 1
        t += steps
    return taus


def _entrance_orbit(sys: S.SystemDescriptor, x, y,
                    radii: Sequence[float], horizon: int,
                    chunk: int = 1 << 16):
    taus: list[Optional[int]] = [None] * len(radii)
    open_i = 0
    cur = np.asarray(x, dtype=np.float64).reshape(-1)
    yv = np.asarray(y, dtype=np.float64).reshape(-1)
    t = 0
    while t < horizon and open_i < len(radii):
        steps = min(chunk, horizon - t)
        if sys.dim == 1:
            orb = K.orbit1(sys.kind, sys.params, float(cur[0]), steps)
            pts = orb[1:].reshape(-1, 1)
            cur = orb[-1:].copy()
        else:
            orb = K.orbit2(sys.kind, sys.params, float(cur[0]),
                           float(cur[1]), steps)
            pts = orb[1:]
            cur = orb[-1].copy()
        d = np.zeros(pts.shape[0])
        for k in range(sys.dim):
            g = np.abs(pts[:, k] - yv[k])
            if sys.metric.wrap[k]:
                g = np.minimum(g, 1.0 - g)
            d = np.maximum(d, g)
        while open_i < len(radii):
            hit = d <= radii[open_i]
            if not hit.any():
                break
            taus[open_i] = t + 1 + int(np.argmax(hit))
            open_i += 1
        t += steps
    return taus


def entrance_time_curve(sys: S.SystemDescriptor, x, y,
                        r_grid: Sequence, horizon: int) -> EntranceCurve:
    """First entrance time of the orbit of x into the ball B(y, r) for every
    radius in one scan, with the log-log slope and the max pointwise ratio
    log tau / -log r as a limsup proxy.

    Rational rotations (Fraction parameter) scan one exact period, which
    settles every radius: anything the period misses is censored as
    unreachable rather than horizon-limited.
    """
    radii = sorted((float(r) for r in r_grid), reverse=True)
    if len(radii) < 2:
        raise ValueError("r_grid needs at least 2 radii")
    if radii[0] >= 0.5 or radii[-1] <= 0.0:
        raise ValueError("radii must lie in (0, 1/2)")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    flags: list[str] = []
    gamma = sys.extra.get("gamma") if sys.kind == K.KIND_ROTATION else None
    if isinstance(gamma, Fraction):
        xf = x if isinstance(x, Fraction) else Fraction(float(x)).limit_denominator(10 ** 15)
        yf = y if isinstance(y, Fraction) else Fraction(float(y)).limit_denominator(10 ** 15)
        taus, limit = _entrance_exact_rotation(
            int(gamma.numerator % gamma.denominator),
            int(gamma.denominator), xf, yf, radii, horizon)
        if limit < horizon:
            flags.append(f"orbit periodic with period {limit}; "
                         f"unhit radii are unreachable")
    elif sys.kind == K.KIND_ROTATION:
        taus = _entrance_float_rotation(float(sys.params[0]), float(x),
                                        float(y), radii, horizon)
    else:
        taus = _entrance_orbit(sys, x, y, radii, horizon)
    records = [EntranceRecord(r, tau, float(x), float(y), tau is None)
               for r, tau in zip(radii, taus)]
    xs, ys, ratios = [], [], []
    for rec in records:
        if rec.censored:
            continue
        lx = -math.log2(rec.r)
        ly = math.log2(rec.tau)
        xs.append(lx)
        ys.append(ly)
        ratios.append((ly / lx, rec.r))
    if any(rec.censored for rec in records):
        flags.append("censored: horizon reached before entrance at the "
                     "smallest radii")
    if len(xs) >= 2:
        fit = SC.fit_slope(np.asarray(xs), np.asarray(ys))
        slope, r2 = fit.slope, fit.r2
    else:
        slope, r2 = math.nan, math.nan
        flags.append("too few uncensored radii for a slope")
    if ratios:
        mr, mr_r = max(ratios)
    else:
        mr, mr_r = math.nan, math.nan
    return EntranceCurve(records, slope, r2, mr, mr_r, horizon,
                         tuple(flags))
