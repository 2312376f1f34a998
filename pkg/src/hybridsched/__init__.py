"""Joint DAG task placement and wired/wireless transfer scheduling."""

from .bounds import BoundPair, bound_pair, longest_branch, upper_bound
from .model import (
    LOCAL,
    TIME_UNITS_PER_SECOND,
    WIRED,
    Channel,
    DataEdge,
    EdgeSlot,
    JobGraph,
    NetworkConfig,
    ProblemInstance,
    Schedule,
    Task,
    TaskSlot,
    TimeUnits,
    makespan,
    topological_order,
    transfer_durations,
    validate_job,
    wireless,
)
from .solver import (
    FEASIBLE,
    INFEASIBLE,
    OPTIMAL,
    UNKNOWN,
    SolverConfig,
    SolverResult,
    solve_exact,
    solve_feasibility,
    solve_wired_only,
)
from .validate import Violation, validate_schedule

__all__ = [
    "BoundPair",
    "Channel",
    "DataEdge",
    "EdgeSlot",
    "FEASIBLE",
    "INFEASIBLE",
    "JobGraph",
    "LOCAL",
    "NetworkConfig",
    "OPTIMAL",
    "ProblemInstance",
    "Schedule",
    "SolverConfig",
    "SolverResult",
    "Task",
    "TaskSlot",
    "TimeUnits",
    "TIME_UNITS_PER_SECOND",
    "UNKNOWN",
    "Violation",
    "WIRED",
    "bound_pair",
    "longest_branch",
    "makespan",
    "solve_exact",
    "solve_feasibility",
    "solve_wired_only",
    "topological_order",
    "transfer_durations",
    "upper_bound",
    "validate_job",
    "validate_schedule",
    "wireless",
]
