"""Exact psi-Wasserstein-Orlicz transport between finitely supported measures."""

from .curves import (
    ac_energy,
    arc_length_reparametrize,
    constant_curve,
    discrete_speed,
    energy_audit,
    marginal_audit,
    step_distances,
    step_jensen_check,
    superpose,
)
from .errors import ObstructionError, PreconditionError
from .geodesics import concentration_check, constant_speed_check, intermediate_plan_optimality, synthesize
from .measures import Coupling, DiscreteMeasure, MeasureCurve, PathMeasure, dirac, uniform
from .metric import ExtendedMetric, GeodesicOracle, MetricError, from_point_cloud, validate_metric, with_blocked_pairs
from .orlicz import WeightedSamples, dual_bracket, dual_trials, holder_check, luxemburg_norm, modular
from .transport import (
    admissible_check,
    glue,
    jensen_bound_check,
    min_modular_plan,
    optimality_certificate,
    wasserstein_orlicz,
)
from .young import (
    CATALOG,
    YoungFunction,
    exp_growth,
    from_spec,
    linear_bounded,
    linf,
    llogl,
    power,
    power_exp,
    tabulated,
)

__version__ = "0.1.0"
