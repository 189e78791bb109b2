"""Solver-agnostic sparse LP layer with interchangeable backends."""

from .backends import solve
from .lpformat import write_lp
from .problem import (
    INFINITY,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TIME_LIMIT,
    STATUS_UNBOUNDED,
    LpOptions,
    LpProblem,
    LpSolution,
    constraint_violation,
)

__all__ = [
    "INFINITY",
    "STATUS_INFEASIBLE",
    "STATUS_OPTIMAL",
    "STATUS_TIME_LIMIT",
    "STATUS_UNBOUNDED",
    "LpOptions",
    "LpProblem",
    "LpSolution",
    "constraint_violation",
    "solve",
    "write_lp",
]
