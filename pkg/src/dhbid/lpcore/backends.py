"""Backend selection and the scipy/HiGHS wrapper.

``solve`` is the single entry point. The 'simplex' backend is the authored
reference implementation; 'highs' wraps scipy.optimize.linprog for problems of
replay scale. 'auto' prefers HiGHS when scipy is importable. All backends are
deterministic for fixed inputs and agree on objectives within tolerance.
"""

from __future__ import annotations

import logging

import numpy as np

from ..errors import SolverError
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
from .simplex import solve_simplex

log = logging.getLogger(__name__)

try:  # scipy is a hard dependency, but keep the reference path self-contained
    from scipy.optimize import linprog as _linprog
    from scipy.sparse import csr_matrix as _csr_matrix

    _HAVE_HIGHS = True
except ImportError:  # pragma: no cover
    _HAVE_HIGHS = False


def solve(problem: LpProblem, options: LpOptions | None = None) -> LpSolution:
    """Solve a built problem; never raises for regular Infeasible/Unbounded."""
    options = options or LpOptions()
    backend = options.backend
    if backend == "auto":
        backend = "highs" if _HAVE_HIGHS else "simplex"
    if backend == "simplex":
        solution = solve_simplex(problem, options)
    elif backend == "highs":
        solution = _solve_highs(problem, options)
    else:
        raise SolverError(f"unknown backend {backend!r}")
    if solution.status == STATUS_OPTIMAL:
        worst = constraint_violation(problem, solution.x)
        scale = 1.0 + float(np.max(np.abs(solution.x), initial=0.0))
        if worst > 1e-8 * scale + 1e-8:
            log.warning(
                "%s backend returned Optimal with residual %.3e on problem %s",
                backend, worst, problem.name,
            )
    return solution


def _solve_highs(problem: LpProblem, options: LpOptions) -> LpSolution:
    if not _HAVE_HIGHS:  # pragma: no cover
        raise SolverError("scipy is not available; use backend='simplex'")
    n = problem.n_variables
    c = problem.objective_array()
    lb = problem.lower_array()
    ub = problem.upper_array()
    lb = np.where(lb <= -INFINITY, -np.inf, lb)
    ub = np.where(ub >= INFINITY, np.inf, ub)

    ub_rows: list[int] = []
    eq_rows: list[int] = []
    for i, (_, _, relation, _, _) in enumerate(problem.rows):
        (eq_rows if relation == "=" else ub_rows).append(i)

    def _matrix(row_ids: list[int], flip_ge: bool):
        data: list[float] = []
        rows: list[int] = []
        cols: list[int] = []
        rhs = np.zeros(len(row_ids))
        for k, i in enumerate(row_ids):
            handles, coefs, relation, b, _ = problem.rows[i]
            sign = -1.0 if (flip_ge and relation == ">=") else 1.0
            rows.extend([k] * len(handles))
            cols.extend(handles)
            data.extend(sign * c_ for c_ in coefs)
            rhs[k] = sign * b
        if not row_ids:
            return None, None
        mat = _csr_matrix((data, (rows, cols)), shape=(len(row_ids), n))
        return mat, rhs

    A_ub, b_ub = _matrix(ub_rows, flip_ge=True)
    A_eq, b_eq = _matrix(eq_rows, flip_ge=False)
    lp_options = {"presolve": True}
    if options.time_limit is not None:
        lp_options["time_limit"] = options.time_limit
    res = _linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=np.column_stack([lb, ub]),
        method="highs",
        options=lp_options,
    )
    if res.status == 0:
        x = np.asarray(res.x, dtype=float)
        return LpSolution(STATUS_OPTIMAL, float(np.dot(c, x)), x, problem,
                          int(res.nit), res.message)
    if res.status == 2:
        return LpSolution(STATUS_INFEASIBLE, None, None, problem, int(res.nit), res.message)
    if res.status == 3:
        return LpSolution(STATUS_UNBOUNDED, None, None, problem, int(res.nit), res.message)
    if res.status == 1:
        x = None if res.x is None else np.asarray(res.x, dtype=float)
        objective = None if x is None else float(np.dot(c, x))
        return LpSolution(STATUS_TIME_LIMIT, objective, x, problem, int(res.nit), res.message)
    raise SolverError(f"HiGHS numerical failure: {res.message}")
