"""Reference LP backend: bounded-variable revised primal simplex.

Two-phase method with one slack and one artificial column per row. Pricing is
Dantzig (most negative reduced cost) and falls back to Bland's rule for good
once 1000 degenerate pivots have accumulated, which guarantees termination.
The basis inverse is kept explicitly (dense) and refreshed from scratch at a
fixed pivot interval; that is fine at desk scale, larger models should use the
'highs' backend.
"""

from __future__ import annotations

import logging
import time

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
)

log = logging.getLogger(__name__)

_AT_LB = 0
_AT_UB = 1
_BASIC = 2

_REFACTOR_EVERY = 64
_DEGENERATE_LIMIT = 1000  # pivots before switching to Bland's rule
_FEAS_TOL = 1e-8
_MAX_DENSE_ENTRIES = 30_000_000


def solve_simplex(problem: LpProblem, options: LpOptions) -> LpSolution:
    n = problem.n_variables
    m = problem.n_constraints
    if (n + 2 * m) * max(m, 1) > _MAX_DENSE_ENTRIES:
        raise SolverError(
            f"problem too large for the dense reference simplex "
            f"({n} variables, {m} rows); use backend='highs'"
        )

    c_orig = problem.objective_array()
    lb = problem.lower_array()
    ub = problem.upper_array()
    lb = np.where(lb <= -INFINITY, -np.inf, lb)
    ub = np.where(ub >= INFINITY, np.inf, ub)

    if n == 0:
        # Only constant rows; feasible iff every row holds with zero activity.
        ok = all(
            (rel == "<=" and 0.0 <= rhs + _FEAS_TOL)
            or (rel == ">=" and 0.0 >= rhs - _FEAS_TOL)
            or (rel == "=" and abs(rhs) <= _FEAS_TOL)
            for _, _, rel, rhs, _ in problem.rows
        )
        status = STATUS_OPTIMAL if ok else STATUS_INFEASIBLE
        x = np.zeros(0) if ok else None
        return LpSolution(status, 0.0 if ok else None, x, problem)

    # Columns: [structural | slacks | artificials]. Row i reads a_i x + s_i = b.
    total = n + 2 * m
    A = np.zeros((m, total))
    b = np.zeros(m)
    for i, (handles, coefs, relation, rhs, _) in enumerate(problem.rows):
        if handles:
            A[i, handles] = coefs
        b[i] = rhs
        A[i, n + i] = 1.0
    c = np.concatenate([c_orig, np.zeros(2 * m)])
    L = np.concatenate([lb, np.zeros(2 * m)])
    U = np.concatenate([ub, np.zeros(2 * m)])
    for i, (_, _, relation, _, _) in enumerate(problem.rows):
        if relation == "<=":
            U[n + i] = np.inf
        elif relation == ">=":
            L[n + i] = -np.inf
        # '=': slack fixed at 0

    # Nonbasic start: nearest finite bound, 0 for free variables.
    x = np.zeros(total)
    state = np.full(total, _AT_LB, dtype=np.int8)
    for j in range(n + m):
        if np.isfinite(L[j]) and (not np.isfinite(U[j]) or abs(L[j]) <= abs(U[j])):
            x[j] = L[j]
            state[j] = _AT_LB
        elif np.isfinite(U[j]):
            x[j] = U[j]
            state[j] = _AT_UB
        else:
            x[j] = 0.0
            state[j] = _AT_LB  # free variable parked at 0

    # Artificials absorb the initial row residuals so the start is feasible.
    resid = b - A[:, : n + m] @ x[: n + m]
    art = np.arange(n + m, total)
    for i in range(m):
        A[i, n + m + i] = 1.0 if resid[i] >= 0 else -1.0
        x[n + m + i] = abs(resid[i])
        U[n + m + i] = np.inf
    state[art] = _BASIC
    basis = art.copy()

    solver = _Simplex(A, b, c, L, U, x, state, basis, options)
    phase1_obj = solver.run(phase=1, cost=_phase1_cost(total, art))
    if solver.timed_out:
        return LpSolution(STATUS_TIME_LIMIT, None, None, problem,
                          solver.iterations, "time limit during phase 1")
    if phase1_obj > 1e-7 * (1.0 + np.abs(b).sum()):
        return LpSolution(STATUS_INFEASIBLE, None, None, problem, solver.iterations)
    # Lock artificials at zero for phase 2.
    solver.U[art] = 0.0
    solver.x[art] = np.clip(solver.x[art], 0.0, 0.0)

    obj = solver.run(phase=2, cost=c)
    xs = solver.x[:n].copy()
    objective = float(np.dot(c_orig, xs))
    if solver.timed_out:
        return LpSolution(STATUS_TIME_LIMIT, objective, xs, problem,
                          solver.iterations, "time limit; best feasible point returned")
    if solver.unbounded:
        return LpSolution(STATUS_UNBOUNDED, None, None, problem, solver.iterations)
    return LpSolution(STATUS_OPTIMAL, objective, xs, problem, solver.iterations)


def _phase1_cost(total: int, art: np.ndarray) -> np.ndarray:
    cost = np.zeros(total)
    cost[art] = 1.0
    return cost


class _Simplex:
    """Shared machinery for both phases; state mutates in place."""

    def __init__(self, A, b, c, L, U, x, state, basis, options: LpOptions):
        self.A, self.b, self.L, self.U = A, b, L, U
        self.x, self.state, self.basis = x, state, basis
        self.tol = max(options.tolerance, 1e-12)
        self.time_limit = options.time_limit
        self.started = time.monotonic()
        self.iterations = 0
        self.degenerate = 0
        self.use_bland = False
        self.timed_out = False
        self.unbounded = False
        self.Binv = np.linalg.inv(A[:, basis])
        self.since_refactor = 0

    def refactor(self) -> None:
        try:
            self.Binv = np.linalg.inv(self.A[:, self.basis])
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular basis during simplex refactorisation") from exc
        nb = np.flatnonzero(self.state != _BASIC)
        rhs = self.b - self.A[:, nb] @ self.x[nb]
        self.x[self.basis] = self.Binv @ rhs
        self.since_refactor = 0

    def run(self, phase: int, cost: np.ndarray) -> float:
        A, L, U = self.A, self.L, self.U
        self.unbounded = False
        max_iter = 2000 + 200 * (A.shape[0] + A.shape[1])
        self.refactor()
        for _ in range(max_iter):
            self.iterations += 1
            if self.time_limit is not None:
                if time.monotonic() - self.started > self.time_limit:
                    self.timed_out = True
                    break
            if self.since_refactor >= _REFACTOR_EVERY:
                self.refactor()

            y = cost[self.basis] @ self.Binv
            d = cost - y @ A
            nonbasic = self.state != _BASIC
            fixed = L == U
            up_ok = nonbasic & ~fixed & (self.state == _AT_LB) & (d < -self.tol)
            dn_ok = nonbasic & ~fixed & (self.state == _AT_UB) & (d > self.tol)
            # Free nonbasic variables sit at 0 with state AT_LB but -inf lb:
            # allow them to move against the sign of d in either direction.
            free = nonbasic & np.isneginf(L) & np.isposinf(U)
            up_ok |= free & (d < -self.tol)
            dn_ok |= free & (d > self.tol)
            candidates = np.flatnonzero(up_ok | dn_ok)
            if candidates.size == 0:
                break  # optimal for this phase
            if self.use_bland:
                e = int(candidates[0])
            else:
                e = int(candidates[np.argmax(np.abs(d[candidates]))])
            direction = 1.0 if up_ok[e] else -1.0

            w = self.Binv @ A[:, e]
            # Max step before a basic variable or the entering bound blocks.
            xB = self.x[self.basis]
            delta = -direction * w
            t_best = U[e] - L[e] if np.isfinite(U[e] - L[e]) else np.inf
            leave_row = -1
            eps = 1e-10
            for i in range(w.size):
                di = delta[i]
                if di > eps:
                    ui = U[self.basis[i]]
                    ti = (ui - xB[i]) / di if np.isfinite(ui) else np.inf
                elif di < -eps:
                    li = L[self.basis[i]]
                    ti = (li - xB[i]) / di if np.isfinite(li) else np.inf
                else:
                    continue
                if ti < -1e-9:
                    ti = 0.0
                if ti < t_best - 1e-12 or (
                    ti < t_best + 1e-12
                    and leave_row >= 0
                    and self._prefer(i, leave_row, w)
                ):
                    t_best = max(ti, 0.0)
                    leave_row = i
            if not np.isfinite(t_best):
                self.unbounded = True
                break
            if t_best <= 1e-12:
                self.degenerate += 1
                if self.degenerate > _DEGENERATE_LIMIT and not self.use_bland:
                    self.use_bland = True
                    log.debug("simplex: switching to Bland's rule after %d degenerate pivots",
                              self.degenerate)

            self.x[self.basis] = xB - direction * t_best * w
            if leave_row < 0:
                # Bound flip: entering variable runs exactly to its other bound.
                self.x[e] = U[e] if direction > 0 else L[e]
                self.state[e] = _AT_UB if direction > 0 else _AT_LB
            else:
                self.x[e] = self.x[e] + direction * t_best
                leaving = self.basis[leave_row]
                dl = delta[leave_row]
                self.state[leaving] = _AT_UB if dl > 0 else _AT_LB
                self.x[leaving] = U[leaving] if dl > 0 else L[leaving]
                self.state[e] = _BASIC
                self.basis[leave_row] = e
                self._update_binv(w, leave_row)
                self.since_refactor += 1
        else:
            raise SolverError(
                f"simplex iteration limit hit in phase {phase} "
                f"({self.iterations} pivots); model may be numerically unstable"
            )
        self.refactor()
        return float(cost[self.basis] @ self.x[self.basis]
                     + cost[self.state != _BASIC] @ self.x[self.state != _BASIC])

    def _prefer(self, i: int, j: int, w: np.ndarray) -> bool:
        """Tie-break rows: Bland by variable index, else by pivot magnitude."""
        if self.use_bland:
            return self.basis[i] < self.basis[j]
        return abs(w[i]) > abs(w[j])

    def _update_binv(self, w: np.ndarray, r: int) -> None:
        piv = w[r]
        if abs(piv) < 1e-11:
            self.refactor()
            return
        # Product-form update: Binv <- E @ Binv with eta column from w.
        eta = -w / piv
        eta[r] = 1.0 / piv - 1.0
        self.Binv += np.outer(eta, self.Binv[r])
