"""Time-dependent activity scheduling with capacity-limited, replenishable
resources: exact solvers over (partially) time-expanded networks, an
EV-routing instance generator, and a savings-heuristic benchmark harness."""

from .model import (
    Activity,
    InfeasibleProblem,
    Problem,
    ReplenishMode,
    Schedule,
    Violation,
    greedy_earliest,
    tighten_windows,
    validate_schedule,
)
from .pwl import PwlFunction, fit_pwl
from .ddd import DddResult, solve as solve_ddd, preload
from .replen import solve_ddd_replen, solve_restricted
from .ten import Network, SolveStats, full_expand, solve as solve_network

__all__ = [
    "Activity",
    "DddResult",
    "InfeasibleProblem",
    "Network",
    "Problem",
    "PwlFunction",
    "ReplenishMode",
    "Schedule",
    "SolveStats",
    "Violation",
    "fit_pwl",
    "full_expand",
    "greedy_earliest",
    "preload",
    "solve_ddd",
    "solve_ddd_replen",
    "solve_network",
    "solve_restricted",
    "tighten_windows",
    "validate_schedule",
]

__version__ = "0.1.0"
