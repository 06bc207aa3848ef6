"""Optimal steady-state water flow through a series chain of plant segments."""

from .chain import (
    Feasibility,
    OptimalSolution,
    PlantChain,
    Segment,
    SolutionCase,
    detect_bottleneck,
    is_feasible,
    multi_segment_solve,
    solve,
    two_segment_solve,
)
from .config import DEFAULT_CONFIG, SolverConfig
from .curves import (
    CurveValidity,
    Linear,
    Weibull,
    derivative,
    evaluate,
    upper_support,
    validate,
)
from .flow import SegmentCapacity, capacity, flow, solve_rising
from .oracle import oracle_grid

__version__ = "0.1.0"

__all__ = [
    "CurveValidity",
    "DEFAULT_CONFIG",
    "Feasibility",
    "Linear",
    "OptimalSolution",
    "PlantChain",
    "Segment",
    "SegmentCapacity",
    "SolutionCase",
    "SolverConfig",
    "Weibull",
    "capacity",
    "derivative",
    "detect_bottleneck",
    "evaluate",
    "flow",
    "is_feasible",
    "multi_segment_solve",
    "oracle_grid",
    "solve",
    "solve_rising",
    "two_segment_solve",
    "upper_support",
    "validate",
]
