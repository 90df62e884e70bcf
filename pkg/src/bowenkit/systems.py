"""System descriptors: domain, metric, map rule, invariant-measure sampler.

A point is a plain float64 ndarray of shape (d,) with every coordinate in
[0, 1).  The metric is the sup over per-coordinate distances, each of which
is either the circle distance (wrap flag set) or the absolute difference.

The eight built-ins:

* ``rotation(gamma)``        x -> x + gamma mod 1, circle metric
* ``doubling``               x -> 2x mod 1, circle metric
* ``identity``               dimension 1 or 2
* ``logistic(lam)``          x -> lam x (1-x) on [0,1], empirical measure
* ``iet(lengths, perm)``     interval exchange on [0,1), interval metric
* ``casati_prosen(a, b)``    (q,p) -> (q + p + b, p + a theta(q)) on T^2
* ``cut_torus(alpha)``       x -> x + alpha with an x-dependent quarter shift
                             of y along two cut circles
* ``pw_isometry_2d(atoms)``  polygonal atoms, each rotated and translated

Boundary convention everywhere: intervals are closed on the left and open on
the right, so a discontinuity point takes its right-continuous branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels as K

# Accumulation point of the period-doubling cascade of the logistic family,
# to the digits used by default (config-overridable).  The test suite
# re-derives it with a superstable-orbit bisection before relying on it.
LAMBDA_INF = 3.5699456720


@dataclass(frozen=True)
class MetricSpec:
    """Per-coordinate wrap flags, combined by sup."""

    wrap: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.wrap)

    def dist(self, p, q) -> float:
        p = np.asarray(p, dtype=np.float64)
        q = np.asarray(q, dtype=np.float64)
        best = 0.0
        for c, w in enumerate(self.wrap):
            d = abs(p[c] - q[c])
            if w:
                d = d % 1.0
                if d > 0.5:
                    d = 1.0 - d
            if d > best:
                best = d
        return best


@dataclass
class SystemDescriptor:
    name: str
    dim: int
    kind: int
    params: np.ndarray
    metric: MetricSpec
    measure: str = "lebesgue"  # lebesgue | empirical | pushforward_square
    transient: int = 1000
    is_isometry: bool = False
    # exact rotation lattice (p, q) when the x-rotation number is rational;
    # enables the drift-free cut_torus separation kernel
    lattice: Optional[tuple[int, int]] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=np.float64)

    @property
    def wrap1(self) -> int:
        return self.metric.wrap[0]


def _frac(x: float) -> float:
    return x % 1.0


def make_rotation(gamma) -> SystemDescriptor:
    """Circle rotation x -> x + gamma mod 1.  A Fraction gamma keeps the
    orbit on an exact lattice (recorded for exact-arithmetic scans)."""
    lattice = None
    if isinstance(gamma, Fraction):
        lattice = (int(gamma.numerator % gamma.denominator),
                   int(gamma.denominator))
    return SystemDescriptor(
        name="rotation", dim=1, kind=K.KIND_ROTATION,
        params=np.array([float(gamma) % 1.0]), metric=MetricSpec((1,)),
        is_isometry=True, lattice=lattice, extra={"gamma": gamma})


def make_doubling() -> SystemDescriptor:
    return SystemDescriptor(
        name="doubling", dim=1, kind=K.KIND_DOUBLING,
        params=np.zeros(0), metric=MetricSpec((1,)))


def make_identity(dim: int = 1, wrap: bool = True) -> SystemDescriptor:
    return SystemDescriptor(
        name="identity", dim=dim, kind=K.KIND_IDENTITY,
        params=np.zeros(0), metric=MetricSpec(tuple([1 if wrap else 0] * dim)),
        is_isometry=True)


def make_logistic(lam: float = LAMBDA_INF,
                  transient: int = 5000) -> SystemDescriptor:
    if not 0.0 < lam <= 4.0:
        raise ValueError("logistic parameter must be in (0, 4]")
    return SystemDescriptor(
        name="logistic", dim=1, kind=K.KIND_LOGISTIC,
        params=np.array([lam]), metric=MetricSpec((0,)),
        measure="empirical", transient=transient)


def iet_layout(lengths: Sequence, permutation: Sequence[int]):
    """Breakpoints and per-atom translations of an interval exchange.

    Works elementwise over floats or Fractions.  ``permutation`` gives the
    1-based target slot of each source interval.
    """
    m = len(lengths)
    if sorted(permutation) != list(range(1, m + 1)):
        raise ValueError("permutation must be a bijection of 1..m")
    total = sum(lengths)
    zero = total - total
    breaks = [zero]
    for ln in lengths:
        if ln <= zero:
            raise ValueError("interval lengths must be positive")
        breaks.append(breaks[-1] + ln)
    # start of interval i in the image: mass of intervals placed before it
    starts = []
    for i in range(m):
        s = zero
        for j in range(m):
            if permutation[j] < permutation[i]:
                s = s + lengths[j]
        starts.append(s)
    trans = [starts[i] - breaks[i] for i in range(m)]
    return breaks, trans


def make_iet(lengths: Sequence, permutation: Optional[Sequence[int]] = None
             ) -> SystemDescriptor:
    if permutation is None:
        permutation = lengths.permutation
        lengths = lengths.lengths
    lengths = list(lengths)
    total = sum(Fraction(x) if isinstance(x, (Fraction, int)) else Fraction(repr(x))
                for x in lengths)
    if not isinstance(lengths[0], Fraction):
        if abs(float(total) - 1.0) > 1e-12:
            raise ValueError("interval lengths must sum to 1")
    elif total != 1:
        raise ValueError("interval lengths must sum to 1 exactly")
    breaks, trans = iet_layout(lengths, list(permutation))
    m = len(lengths)
    params = np.empty(2 * m + 2)
    params[0] = m
    params[1:m + 2] = [float(b) for b in breaks]
    params[m + 2:2 * m + 2] = [float(t) for t in trans]
    params[1] = 0.0
    params[m + 1] = 1.0
    return SystemDescriptor(
        name="iet", dim=1, kind=K.KIND_IET, params=params,
        metric=MetricSpec((0,)),
        extra={"lengths": lengths, "permutation": tuple(permutation)})


def make_casati_prosen(alpha: float, beta: float,
                       factorized: bool = False) -> SystemDescriptor:
    return SystemDescriptor(
        name="casati_prosen", dim=2, kind=K.KIND_CASATI_PROSEN,
        params=np.array([alpha, beta, 1.0 if factorized else 0.0]),
        metric=MetricSpec((1, 1)))


def make_cut_torus(alpha) -> SystemDescriptor:
    """Torus map T1 o T2: first shift y by -1/4 or +1/4 according to which
    arc between the cut points 1/2 - alpha and 1/2 holds x, then rotate x by
    alpha.  A Fraction alpha keeps the x dynamics on an exact lattice.
    """
    lattice = None
    if isinstance(alpha, Fraction):
        lattice = (int(alpha.numerator % alpha.denominator),
                   int(alpha.denominator))
        a = float(alpha)
    else:
        a = float(alpha)
    a = a % 1.0
    lo = (0.5 - a) % 1.0
    hi = 0.5
    return SystemDescriptor(
        name="cut_torus", dim=2, kind=K.KIND_CUT_TORUS,
        params=np.array([a, lo, hi]), metric=MetricSpec((1, 1)),
        lattice=lattice, extra={"alpha": alpha})


@dataclass(frozen=True)
class PwAtom:
    vertices: np.ndarray  # (nv, 2)
    angle: float          # radians
    translation: tuple[float, float]


def make_pw_isometry(atoms: Sequence[PwAtom]) -> SystemDescriptor:
    chunks = [np.array([float(len(atoms))])]
    for at in atoms:
        v = np.asarray(at.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("each atom needs at least 3 vertices")
        head = np.array([v.shape[0], math.cos(at.angle), math.sin(at.angle),
                         at.translation[0], at.translation[1]])
        chunks.append(np.concatenate([head, v.ravel()]))
    return SystemDescriptor(
        name="pw_isometry_2d", dim=2, kind=K.KIND_PW_ISOMETRY,
        params=np.concatenate(chunks), metric=MetricSpec((1, 1)),
        extra={"atoms": tuple(atoms)})


# ---------------------------------------------------------------------------
# conjugacies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjugacySpec:
    """Forward map phi and its inverse on the domain."""

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]

    def roundtrip_error(self, pts: np.ndarray) -> float:
        return float(np.max(np.abs(self.inverse(self.forward(pts)) - pts)))


def conj_power(k: int) -> ConjugacySpec:
    if k < 1:
        raise ValueError("power must be a positive integer")
    return ConjugacySpec(
        name=f"power_{k}",
        forward=lambda x: np.asarray(x, dtype=np.float64) ** k,
        inverse=lambda y: np.asarray(y, dtype=np.float64) ** (1.0 / k))


def conj_rotation(c: float) -> ConjugacySpec:
    return ConjugacySpec(
        name=f"rotate_{c:g}",
        forward=lambda x: (np.asarray(x, dtype=np.float64) + c) % 1.0,
        inverse=lambda y: (np.asarray(y, dtype=np.float64) - c) % 1.0)


def conjugate_square(base: SystemDescriptor) -> SystemDescriptor:
    """phi o T o phi^{-1} with phi(x) = x^2 on [0, 1].

    The image system lives on [0, 1] with the interval metric, and its
    invariant measure is the pushforward of the base measure under phi.
    """
    if base.dim != 1 or base.kind not in (K.KIND_IDENTITY, K.KIND_ROTATION,
                                          K.KIND_DOUBLING, K.KIND_LOGISTIC,
                                          K.KIND_IET):
        raise ValueError("square conjugation supports plain 1-d built-ins")
    if base.measure != "lebesgue":
        raise ValueError("square conjugation needs a Lebesgue base measure")
    params = np.concatenate([[0.0, float(base.kind)], base.params])
    return SystemDescriptor(
        name=base.name + "_sq", dim=1, kind=K.KIND_CONJ_SQUARE, params=params,
        metric=MetricSpec((0,)), measure="pushforward_square",
        extra={"base": base})


def conjugate_rotate(base: SystemDescriptor, c: float) -> SystemDescriptor:
    if base.dim != 1 or base.kind not in (K.KIND_IDENTITY, K.KIND_ROTATION,
                                          K.KIND_DOUBLING, K.KIND_LOGISTIC,
                                          K.KIND_IET):
        raise ValueError("rotation conjugation supports plain 1-d built-ins")
    params = np.concatenate([[c % 1.0, float(base.kind)], base.params])
    return SystemDescriptor(
        name=base.name + "_rot", dim=1, kind=K.KIND_CONJ_ROTATE, params=params,
        metric=base.metric, measure=base.measure, transient=base.transient,
        is_isometry=base.is_isometry, extra={"base": base})


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _check_point(sys: SystemDescriptor, p) -> np.ndarray:
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if p.shape != (sys.dim,):
        raise ValueError(f"point must have shape ({sys.dim},)")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("point outside domain [0,1]^d")
    return p


def step(sys: SystemDescriptor, p) -> np.ndarray:
    """One application of the map, coordinates wrapped back into [0, 1)."""
    p = _check_point(sys, p)
    if sys.dim == 1:
        if K.JIT_ENABLED:
            return np.array([K.step1_jit(sys.kind, sys.params, float(p[0]))])
        return K.step1_np(sys.kind, sys.params, p[:1]).copy()
    if K.JIT_ENABLED:
        x, y = K.step2_jit(sys.kind, sys.params, float(p[0]), float(p[1]))
        return np.array([x, y])
    xa, ya = K.step2_np(sys.kind, sys.params, p[:1], p[1:2])
    return np.array([xa[0], ya[0]])


def orbit_segment(sys: SystemDescriptor, p, n: int) -> np.ndarray:
    """T^0(p) .. T^n(p) as an (n+1, d) array."""
    if n < 0:
        raise ValueError("n must be >= 0")
    p = _check_point(sys, p)
    if sys.dim == 1:
        return K.orbit1(sys.kind, sys.params, p[0], n).reshape(-1, 1)
    return K.orbit2(sys.kind, sys.params, p[0], p[1], n)


def sup_orbit_distance(sys: SystemDescriptor, x, y, n: int,
                       cutoff: float = math.inf) -> float:
    """max over 0 <= i <= n of d(T^i x, T^i y), with early exit past cutoff.

    The returned value is exact when it is <= cutoff; past the cutoff any
    exceeding value may be returned.
    """
    x = _check_point(sys, x)
    y = _check_point(sys, y)
    d0 = sys.metric.dist(x, y)
    if sys.is_isometry:
        return d0
    best = d0
    if best > cutoff:
        return best
    chunk = 1 << 14
    t = 0
    cx, cy = x, y
    while t < n:
        m = min(chunk, n - t)
        ox = orbit_segment(sys, cx, m)
        oy = orbit_segment(sys, cy, m)
        for c, w in enumerate(sys.metric.wrap):
            d = np.abs(ox[:, c] - oy[:, c])
            if w:
                d = d % 1.0
                d = np.where(d > 0.5, 1.0 - d, d)
            mx = float(d.max())
            if mx > best:
                best = mx
        if best > cutoff:
            return best
        cx, cy = ox[-1], oy[-1]
        t += m
    return best


def rng_for(seed: int) -> np.random.Generator:
    """Counter-based generator: one stream per seed, stable across runs."""
    return np.random.Generator(np.random.Philox(seed))


def sample_measure(sys: SystemDescriptor, M: int, seed: int) -> np.ndarray:
    """M points distributed per the system's measure spec, shape (M, d)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = rng_for(seed)
    if sys.measure == "lebesgue":
        return rng.random((M, sys.dim))
    if sys.measure == "pushforward_square":
        return rng.random((M, sys.dim)) ** 2
    if sys.measure == "empirical":
        if sys.dim != 1:
            raise ValueError("empirical sampling implemented for d = 1")
        x0 = float(rng.random())
        orb = K.orbit1(sys.kind, sys.params, x0, sys.transient + M)
        return orb[sys.transient + 1:].reshape(-1, 1)
    raise ValueError(f"unknown measure spec {sys.measure!r}")


def empirical_orbit(sys: SystemDescriptor, M: int, n_extra: int,
                    seed: int) -> np.ndarray:
    """The raw orbit behind the empirical sample, extended n_extra steps.

    Index B + 1 + k holds sample k, so orbit[B + 1 + k + t] is T^t of it.
    """
    rng = rng_for(seed)
    x0 = float(rng.random())
    return K.orbit1(sys.kind, sys.params, x0, sys.transient + M + n_extra)


# ---------------------------------------------------------------------------
# registry for the CLI
# ---------------------------------------------------------------------------

BUILTIN_DOC = {
    "rotation": ("gamma", "circle rotation x -> x + gamma mod 1"),
    "doubling": ("", "angle doubling x -> 2x mod 1"),
    "identity": ("dim (1|2)", "identity map, calibration baseline"),
    "logistic": ("lam (default period-doubling accumulation point)",
                 "logistic map on [0,1], empirical attractor measure"),
    "iet": ("lengths, permutation",
            "interval exchange of [0,1), interval metric"),
    "casati_prosen": ("alpha, beta, factorized (optional)",
                      "skew torus map with a +-alpha vertical kick"),
    "cut_torus": ("alpha (float or exact fraction p/q)",
                  "x-rotation with quarter-turn y shifts along two cuts"),
    "pw_isometry_2d": ("atom polygons with angle and translation each",
                       "piecewise isometry of the torus"),
}
