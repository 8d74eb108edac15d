"""Multi-object tracking as a non-separable vector flow, solved exactly by branch and bound."""

from .bnb import SolveResult, SolverConfig, Status, greedy_solve, solve
from .flowcore import (EPS_FEAS, INF, Finite, FlowNetwork, PathCover, Solution, StructuralError,
                       Violation, cover_value, flow_from_paths, objective, validate)
from .oracle import brute_force_solve

__version__ = "0.1.0"

__all__ = [
    "EPS_FEAS", "INF", "Finite", "FlowNetwork", "PathCover", "Solution", "SolveResult",
    "SolverConfig", "Status", "StructuralError", "Violation", "brute_force_solve", "cover_value",
    "flow_from_paths", "greedy_solve", "objective", "solve", "validate",
]
