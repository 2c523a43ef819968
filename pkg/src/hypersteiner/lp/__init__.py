"""Exact linear programming: models, the rational simplex, relaxation builders and certificates."""

from .builders import (CapError, build_bidirected_lp, build_bounded_partition_lp, build_directed_hyper_lp,
                       build_partition_lp, build_subtour_lp)
from .model import EQ, GE, LE, LinearProgram, LpError, LpInfeasible, LpSolution, LpUnbounded
from .simplex import solve_exact

__all__ = [
    "CapError", "EQ", "GE", "LE", "LinearProgram", "LpError", "LpInfeasible", "LpSolution", "LpUnbounded",
    "build_bidirected_lp", "build_bounded_partition_lp", "build_directed_hyper_lp", "build_partition_lp",
    "build_subtour_lp", "solve_exact",
]
