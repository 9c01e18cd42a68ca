"""Two-phase genetic algorithm for the resource-constrained project scheduling problem."""

from .evolution import GaParams, RunResult, run_2pga
from .oracle import brute_force_best, enumerate_linear_extensions
from .psplib_io import load_instance, parse_best_known, parse_instance
from .scheduling import (
    ProjectInstance,
    Schedule,
    critical_path_lower_bound,
    random_activity_list,
    ssgs_decode,
    validate_schedule,
)

__all__ = [
    "GaParams",
    "ProjectInstance",
    "RunResult",
    "Schedule",
    "brute_force_best",
    "critical_path_lower_bound",
    "enumerate_linear_extensions",
    "load_instance",
    "parse_best_known",
    "parse_instance",
    "random_activity_list",
    "run_2pga",
    "ssgs_decode",
    "validate_schedule",
]
