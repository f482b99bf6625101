"""Voronoi-based efficient surrogate-assisted evolutionary optimization."""

from .driver import Origin, RunRecord, contribution_ratio, run
from .exceptions import (
    BudgetExhausted,
    ConfigError,
    DegenerateDesign,
    EmptyTopRegion,
    MismatchedRuns,
    OutOfBounds,
    TooFewPoints,
    VesaeaError,
)
from .kernels import BACKEND
from .problem import BenchmarkProblem, BudgetedEvaluator, Kind, make_problem

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BenchmarkProblem",
    "BudgetExhausted",
    "BudgetedEvaluator",
    "ConfigError",
    "DegenerateDesign",
    "EmptyTopRegion",
    "Kind",
    "MismatchedRuns",
    "Origin",
    "OutOfBounds",
    "RunRecord",
    "TooFewPoints",
    "VesaeaError",
    "contribution_ratio",
    "make_problem",
    "run",
]
