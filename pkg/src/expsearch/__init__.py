"""Expanding search: exact solvers, concatenation approximations, a Euclidean
scheme at desk scale, and the ST(1,2) hardness gadget."""

from .core import (
    Instance,
    InstanceError,
    InvalidPattern,
    LatencyReport,
    concat_patterns,
    enumerate_patterns,
    load_instance,
    load_pattern,
    random_pattern,
    require_valid,
    total_latency,
    validate_pattern,
)
from .oracles import (
    AdversarialOracle,
    ExactOracle,
    HeuristicOracle,
    InstanceTooLarge,
    brute_force_esp,
    make_oracle,
)
from .unweighted import plan_unweighted, solve_unweighted
from .weighted import DEFAULT_EPSILON, build_quota_schedule, parse_epsilon, plan_weighted, solve_weighted

__version__ = "0.1.0"

__all__ = [
    "AdversarialOracle",
    "DEFAULT_EPSILON",
    "ExactOracle",
    "HeuristicOracle",
    "Instance",
    "InstanceError",
    "InstanceTooLarge",
    "InvalidPattern",
    "LatencyReport",
    "brute_force_esp",
    "build_quota_schedule",
    "concat_patterns",
    "enumerate_patterns",
    "load_instance",
    "load_pattern",
    "make_oracle",
    "parse_epsilon",
    "plan_unweighted",
    "plan_weighted",
    "random_pattern",
    "require_valid",
    "solve_unweighted",
    "solve_weighted",
    "total_latency",
    "validate_pattern",
]
