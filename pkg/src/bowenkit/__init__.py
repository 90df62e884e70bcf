"""Bowen-ball covering numbers, slow entropy gauges, and local complexity
diagnostics for low-dimensional dynamical systems.

The package estimates two families of quantities against a gauge f(n):
covering complexity (minimal number of Bowen sets covering most of the
measure) and local entropies (decay of the measure of a single Bowen set),
plus the side-decay exponents of optimal rectangles around Bowen sets.
Everything is base-2: ratios and slopes are bits per unit of gauge.
"""

from ._accel import JIT_ENABLED
from ._version import __version__
from .arithmetic import (CFExpansion, EntranceCurve, EntranceRecord,
                         HighPrecReal, TypeReport, continued_fraction,
                         entrance_time_curve, liouville_alpha,
                         tower_exponent, type_estimate)
from .bowen import (BkSeries, BowenQuery, MeasureEstimate, bk_series,
                    bowen_contains, bowen_measure, local_dimension,
                    pi_complexity_bound, set_lower_dimension)
from .config import ConfigError, ExperimentConfig, build_system, parse_config
from .covering import (ComplexityCurve, CoverResult, complexity_curve,
                       covering_backend, exact_cover_count, greedy_cover,
                       membership_matrix, verify_cover)
from .exponents import (ExponentSeries, PesinReport, RectSides,
                        brute_force_sides, companion_cloud, exponent_series,
                        max_inscribed_sides, min_enclosing_sides,
                        pesin_check)
from .iet import (ApproachReport, IetSpec, PScanReport, approach_rate,
                  delta, power_discontinuities, property_P_scan,
                  random_spec, rotation_spec)
from .runner import ResolutionError, RunManifest, run_config
from .scaling import (DEFAULT_W, GaugeFn, RatioSeries, SlopeFit, fit_slope,
                      gauge_scan, n_grid_geometric, n_grid_linear,
                      parse_gauge, tail_proxies, tail_slope)
from .systems import (LAMBDA_INF, PwAtom, SystemDescriptor, conjugate_rotate,
                      conjugate_square, empirical_orbit, make_casati_prosen,
                      make_cut_torus, make_doubling, make_identity,
                      make_iet, make_logistic, make_pw_isometry,
                      make_rotation, orbit_segment, rng_for, sample_measure,
                      step, sup_orbit_distance)

__all__ = [
    "__version__", "JIT_ENABLED",
    # systems
    "SystemDescriptor", "LAMBDA_INF", "make_rotation", "make_doubling",
    "make_identity", "make_iet", "make_logistic", "make_casati_prosen",
    "make_cut_torus", "make_pw_isometry", "conjugate_square",
    "conjugate_rotate", "sample_measure", "empirical_orbit", "rng_for",
    "step", "orbit_segment", "sup_orbit_distance", "PwAtom",
    # bowen
    "BowenQuery", "MeasureEstimate", "BkSeries", "bowen_contains",
    "bowen_measure", "bk_series", "local_dimension", "set_lower_dimension",
    "pi_complexity_bound",
    # covering
    "CoverResult", "ComplexityCurve", "greedy_cover", "complexity_curve",
    "exact_cover_count", "membership_matrix", "verify_cover",
    "covering_backend",
    # scaling
    "GaugeFn", "parse_gauge", "RatioSeries", "SlopeFit", "fit_slope",
    "tail_slope", "tail_proxies", "gauge_scan", "n_grid_geometric",
    "n_grid_linear", "DEFAULT_W",
    # exponents
    "RectSides", "ExponentSeries", "PesinReport", "companion_cloud",
    "min_enclosing_sides", "max_inscribed_sides", "brute_force_sides",
    "exponent_series", "pesin_check",
    # iet
    "IetSpec", "PScanReport", "ApproachReport", "power_discontinuities",
    "delta", "property_P_scan", "approach_rate", "rotation_spec",
    "random_spec",
    # arithmetic
    "HighPrecReal", "CFExpansion", "TypeReport", "EntranceRecord",
    "EntranceCurve", "liouville_alpha", "tower_exponent",
    "continued_fraction", "type_estimate", "entrance_time_curve",
    # config and runner
    "ExperimentConfig", "ConfigError", "parse_config", "build_system",
    "RunManifest", "ResolutionError", "run_config",
]
