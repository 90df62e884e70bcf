"""Experiment config files: INI-style sections of key = value lines.

Sections: [experiment] (kind, name), [system] (name plus per-system
parameters), [parameters] (numerics), [output] (dir).  Unknown sections or
keys are rejected before any compute, as are missing required fields, so a
bad config fails fast with the offending name in the message.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import iet as I
from . import scaling as SC
from . import systems as S

KINDS = ("bk_series", "complexity_curve", "exponents", "iet_scan",
         "bk_gap", "entrance_time", "conjugacy_check", "pesin_check")

SYSTEM_KEYS = {
    "rotation": {"gamma"},
    "doubling": set(),
    "identity": {"dim"},
    "iet": {"lengths", "permutation", "lengths_seed"},
    "logistic": {"lam"},
    "casati_prosen": {"alpha", "beta"},
    "cut_torus": {"alpha"},
    "pw_isometry_2d": set(),
}

PARAM_KEYS = {"epsilon", "eps_prime", "n_grid", "m", "seed", "gauge", "w",
              "center", "starts", "horizon", "radii", "target", "variant"}

# keywords usable wherever a number is expected
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_NUMBER_WORDS = {
    "golden": _GOLDEN,
    "golden_conjugate": _GOLDEN,
    "sqrt2_minus_1": math.sqrt(2.0) - 1.0,
    "feigenbaum": S.LAMBDA_INF,
    # 2-term tower constant 2^-4 + 2^-16, kept exact
    "tower2": Fraction(4097, 65536),
}


class ConfigError(ValueError):
    """Schema or value problem in an experiment config."""


def _number(text: str):
    t = text.strip().lower()
    if t in _NUMBER_WORDS:
        return _NUMBER_WORDS[t]
    if "/" in t:
        try:
            return Fraction(t)
        except ValueError as e:
            raise ConfigError(f"bad fraction {text!r}") from e
    try:
        return float(t)
    except ValueError as e:
        raise ConfigError(f"bad number {text!r}") from e


def _float_list(text: str) -> list:
    return [float(_number(v)) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def _parse_n_grid(text: str) -> list:
    """geometric:lo:hi[:ratio] | linear:lo:hi[:step] | list:v1,v2,..."""
    head, _, rest = text.strip().partition(":")
    try:
        if head == "geometric":
            parts = rest.split(":")
            lo, hi = int(parts[0]), int(parts[1])
            ratio = float(parts[2]) if len(parts) > 2 else math.sqrt(2.0)
            return list(SC.n_grid_geometric(lo, hi, ratio))
        if head == "linear":
            parts = rest.split(":")
            lo, hi = int(parts[0]), int(parts[1])
            step = int(parts[2]) if len(parts) > 2 else 1
            return list(SC.n_grid_linear(lo, hi, step))
        if head == "list":
            vals = _int_list(rest)
            if vals != sorted(set(vals)):
                raise ConfigError("n_grid list must be strictly increasing")
            return vals
    except (IndexError, ValueError) as e:
        raise ConfigError(f"bad n_grid {text!r}") from e
    raise ConfigError(f"unknown n_grid form {head!r}")


@dataclass
class ExperimentConfig:
    kind: str
    name: str
    system_name: str
    system_params: dict
    epsilon: list = field(default_factory=list)
    eps_prime: float = 0.1
    n_grid: list = field(default_factory=list)
    M: int = 100000
    seed: int = 0
    gauges: list = field(default_factory=lambda: ["log2"])
    W: int = SC.DEFAULT_W
    center: Optional[list] = None        # None: drawn from the measure
    starts: int = 1
    horizon: int = 10 ** 6
    radii: list = field(default_factory=list)
    target: float = 0.5
    variant: str = ""
    outdir: str = ""
    text: str = ""                       # raw file contents, for hashing

    def build_system(self) -> S.SystemDescriptor:
        return build_system(self.system_name, self.system_params)


def build_system(name: str, params: dict) -> S.SystemDescriptor:
    if name == "rotation":
        return S.make_rotation(params.get("gamma", _GOLDEN))
    if name == "doubling":
        return S.make_doubling()
    if name == "identity":
        return S.make_identity(int(params.get("dim", 1)))
    if name == "iet":
        if "lengths_seed" in params:
            spec = I.random_spec(3, int(params["lengths_seed"]))
            return spec.system()
        lengths = params.get("lengths")
        perm = params.get("permutation")
        if lengths is None or perm is None:
            raise ConfigError("iet needs lengths and permutation, or "
                              "lengths_seed")
        return S.make_iet(lengths, perm)
    if name == "logistic":
        return S.make_logistic(float(params.get("lam", S.LAMBDA_INF)))
    if name == "casati_prosen":
        return S.make_casati_prosen(
            float(params.get("alpha", _GOLDEN)),
            float(params.get("beta", math.sqrt(2.0) - 1.0)))
    if name == "cut_torus":
        return S.make_cut_torus(params.get("alpha", Fraction(4097, 65536)))
    if name == "pw_isometry_2d":
        # default preset: two half-strips sharing an x shift, opposite
        # quarter-turn y shifts (a hand-buildable piecewise isometry)
        atoms = (
            S.PwAtom(np.array([[0.0, 0.0], [0.5, 0.0], [0.5, 1.0],
                               [0.0, 1.0]]), 0.0, (_GOLDEN, 0.25)),
            S.PwAtom(np.array([[0.5, 0.0], [1.0, 0.0], [1.0, 1.0],
                               [0.5, 1.0]]), 0.0, (_GOLDEN, -0.25)),
        )
        return S.make_pw_isometry(atoms)
    raise ConfigError(f"unknown system {name!r}")


_REQUIRED = {
    "bk_series": ("epsilon", "n_grid"),
    "complexity_curve": ("epsilon", "n_grid"),
    "exponents": ("epsilon", "n_grid"),
    "iet_scan": ("n_grid",),
    "bk_gap": ("epsilon", "n_grid"),
    "entrance_time": ("radii",),
    "conjugacy_check": ("epsilon", "n_grid"),
    "pesin_check": ("epsilon", "n_grid"),
}


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"config syntax: {e}") from e

    known_sections = {"experiment", "system", "parameters", "output"}
    extra = set(cp.sections()) - known_sections
    if extra:
        raise ConfigError(f"unknown section {sorted(extra)[0]!r}")
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    if not cp.has_section("system"):
        raise ConfigError("missing [system] section")

    exp = dict(cp.items("experiment"))
    bad = set(exp) - {"kind", "name"}
    if bad:
        raise ConfigError(f"unknown key experiment.{sorted(bad)[0]}")
    kind = exp.get("kind", "")
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one "
                          f"of {', '.join(KINDS)}")
    name = exp.get("name", path.stem)

    sysd = dict(cp.items("system"))
    sys_name = sysd.pop("name", "")
    if sys_name not in SYSTEM_KEYS:
        raise ConfigError(f"unknown system {sys_name!r}")
    bad = set(sysd) - SYSTEM_KEYS[sys_name]
    if bad:
        raise ConfigError(f"unknown key system.{sorted(bad)[0]}")
    sys_params: dict = {}
    for k, v in sysd.items():
        if k in ("lengths",):
            sys_params[k] = _float_list(v)
        elif k in ("permutation",):
            sys_params[k] = _int_list(v)
        elif k in ("dim", "lengths_seed"):
            sys_params[k] = int(v)
        else:
            sys_params[k] = _number(v)

    par = dict(cp.items("parameters")) if cp.has_section("parameters") else {}
    bad = set(par) - PARAM_KEYS
    if bad:
        raise ConfigError(f"unknown key parameters.{sorted(bad)[0]}")
    for req in _REQUIRED[kind]:
        if req not in par:
            raise ConfigError(f"missing parameters.{req} (required for "
                              f"{kind})")

    out = dict(cp.items("output")) if cp.has_section("output") else {}
    bad = set(out) - {"dir"}
    if bad:
        raise ConfigError(f"unknown key output.{sorted(bad)[0]}")

    cfg = ExperimentConfig(kind=kind, name=name, system_name=sys_name,
                           system_params=sys_params,
                           outdir=out.get("dir", ""), text=text)
    if "epsilon" in par:
        cfg.epsilon = _float_list(par["epsilon"])
        if not cfg.epsilon:
            raise ConfigError("parameters.epsilon is empty")
    if "eps_prime" in par:
        cfg.eps_prime = float(par["eps_prime"])
    if "n_grid" in par:
        cfg.n_grid = _parse_n_grid(par["n_grid"])
    if "m" in par:
        cfg.M = int(par["m"])
    if "seed" in par:
        cfg.seed = int(par["seed"])
    if "gauge" in par:
        cfg.gauges = [g.strip() for g in par["gauge"].split(",") if g.strip()]
        for g in cfg.gauges:
            SC.parse_gauge(g)  # validate early
    if "w" in par:
        cfg.W = int(par["w"])
    if "center" in par and par["center"].strip() != "seeded":
        cfg.center = _float_list(par["center"])
    if "starts" in par:
        cfg.starts = int(par["starts"])
    if "horizon" in par:
        cfg.horizon = int(par["horizon"])
    if "radii" in par:
        cfg.radii = _float_list(par["radii"])
    if "target" in par:
        cfg.target = float(_number(par["target"]))
    if "variant" in par:
        cfg.variant = par["variant"].strip()
    return cfg
