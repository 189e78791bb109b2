"""Solver-agnostic LP container.

Variables are created with explicit bounds and objective coefficients and are
addressed by integer handles (stable insertion order) or by their unique name.
Constraints are sparse rows with relation '<=', '=' or '>='. Bounds use the
``INFINITY`` sentinel (1e30); anything at or beyond it is treated as infinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import SolverError

INFINITY = 1e30

STATUS_OPTIMAL = "Optimal"
STATUS_INFEASIBLE = "Infeasible"
STATUS_UNBOUNDED = "Unbounded"
STATUS_TIME_LIMIT = "TimeLimit"

_RELATIONS = ("<=", "=", ">=")


@dataclass
class LpOptions:
    """Solve options; ``backend`` is 'auto', 'simplex' or 'highs'."""

    backend: str = "auto"
    time_limit: float | None = None
    tolerance: float = 1e-9


class LpProblem:
    """Minimisation problem built incrementally."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self._names: list[str] = []
        self._by_name: dict[str, int] = {}
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._obj: list[float] = []
        # each row: (handles array-list, coefs array-list, relation, rhs, name)
        self.rows: list[tuple[list[int], list[float], str, float, str]] = []

    # -- variables ---------------------------------------------------------

    def add_variable(
        self,
        name: str,
        lb: float = 0.0,
        ub: float = INFINITY,
        obj: float = 0.0,
    ) -> int:
        if name in self._by_name:
            raise SolverError(f"duplicate variable name {name!r}")
        lb, ub, obj = float(lb), float(ub), float(obj)
        if np.isnan(lb) or np.isnan(ub) or not np.isfinite(obj):
            raise SolverError(f"variable {name!r}: bad bounds or objective")
        if lb > ub:
            raise SolverError(f"variable {name!r}: lb {lb} crosses ub {ub}")
        handle = len(self._names)
        self._names.append(name)
        self._by_name[name] = handle
        self._lb.append(lb)
        self._ub.append(ub)
        self._obj.append(obj)
        return handle

    def add_objective(self, handle: int, coef: float) -> None:
        """Add ``coef`` to an existing variable's objective coefficient."""
        self._obj[self._check(handle)] += float(coef)

    def _check(self, handle: int) -> int:
        if not 0 <= handle < len(self._names):
            raise SolverError(f"unknown variable handle {handle}")
        return handle

    @property
    def n_variables(self) -> int:
        return len(self._names)

    @property
    def n_constraints(self) -> int:
        return len(self.rows)

    def name_of(self, handle: int) -> str:
        return self._names[self._check(handle)]

    def handle_of(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError as exc:
            raise SolverError(f"unknown variable name {name!r}") from exc

    # -- constraints -------------------------------------------------------

    def add_constraint(
        self,
        terms: Iterable[tuple[int, float]],
        relation: str,
        rhs: float,
        name: str = "",
    ) -> int:
        if relation not in _RELATIONS:
            raise SolverError(f"unknown relation {relation!r}")
        rhs = float(rhs)
        if not np.isfinite(rhs):
            raise SolverError(f"constraint {name or len(self.rows)}: rhs not finite")
        acc: dict[int, float] = {}
        for handle, coef in terms:
            self._check(handle)
            acc[handle] = acc.get(handle, 0.0) + float(coef)
        handles = list(acc.keys())
        coefs = [acc[h] for h in handles]
        if any(not np.isfinite(c) for c in coefs):
            raise SolverError(f"constraint {name or len(self.rows)}: non-finite coefficient")
        self.rows.append((handles, coefs, relation, rhs, name))
        return len(self.rows) - 1

    # -- array views for backends ------------------------------------------

    def objective_array(self) -> np.ndarray:
        return np.array(self._obj, dtype=float)

    def lower_array(self) -> np.ndarray:
        return np.array(self._lb, dtype=float)

    def upper_array(self) -> np.ndarray:
        return np.array(self._ub, dtype=float)

    def variable_names(self) -> list[str]:
        return list(self._names)


@dataclass
class LpSolution:
    """Result of a solve. ``x`` is indexed by variable handle."""

    status: str
    objective: float | None
    x: np.ndarray | None
    problem: LpProblem = field(repr=False)
    iterations: int = 0
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL

    def value(self, ref: int | str) -> float:
        if self.x is None:
            raise SolverError(f"no solution values available (status {self.status})")
        handle = self.problem.handle_of(ref) if isinstance(ref, str) else ref
        return float(self.x[self.problem._check(handle)])

    def values(self, refs: Sequence[int | str]) -> np.ndarray:
        return np.array([self.value(r) for r in refs])


def constraint_violation(problem: LpProblem, x: np.ndarray) -> float:
    """Largest absolute row/bound violation of ``x``; 0.0 if fully feasible."""
    worst = 0.0
    lb, ub = problem.lower_array(), problem.upper_array()
    finite_lb = lb > -INFINITY
    finite_ub = ub < INFINITY
    if np.any(finite_lb):
        worst = max(worst, float(np.max((lb - x)[finite_lb], initial=0.0)))
    if np.any(finite_ub):
        worst = max(worst, float(np.max((x - ub)[finite_ub], initial=0.0)))
    for handles, coefs, relation, rhs, _ in problem.rows:
        lhs = float(np.dot(x[handles], coefs)) if handles else 0.0
        if relation == "<=":
            worst = max(worst, lhs - rhs)
        elif relation == ">=":
            worst = max(worst, rhs - lhs)
        else:
            worst = max(worst, abs(lhs - rhs))
    return worst
