"""LP container and backend tests, cross-checked against the tableau oracle."""

from __future__ import annotations

import time

import numpy as np
import pytest

from dhbid.errors import SolverError
from dhbid.lpcore import (
    INFINITY,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TIME_LIMIT,
    STATUS_UNBOUNDED,
    LpOptions,
    LpProblem,
    constraint_violation,
    solve,
    write_lp,
)

from oracles import tableau_simplex

BACKENDS = ["simplex", "highs"]


def _solve(problem, backend, **kw):
    return solve(problem, LpOptions(backend=backend, **kw))


def test_builder_basics():
    lp = LpProblem("demo")
    x = lp.add_variable("x", lb=0.0, ub=4.0, obj=1.0)
    y = lp.add_variable("y", lb=-1.0, obj=2.0)
    assert (x, y) == (0, 1)
    assert lp.n_variables == 2
    row = lp.add_constraint([(x, 1.0), (y, 1.0), (x, 0.5)], ">=", 2.0)
    assert row == 0
    # duplicate handles merged
    handles, coefs, rel, rhs, _ = lp.rows[0]
    assert dict(zip(handles, coefs)) == {x: 1.5, y: 1.0}
    assert lp.handle_of("y") == y and lp.name_of(x) == "x"


def test_builder_rejects_bad_input():
    lp = LpProblem()
    lp.add_variable("x")
    with pytest.raises(SolverError):
        lp.add_variable("x")  # duplicate name
    with pytest.raises(SolverError):
        lp.add_variable("y", lb=2.0, ub=1.0)  # crossed bounds
    with pytest.raises(SolverError):
        lp.add_constraint([(5, 1.0)], "<=", 1.0)  # unknown handle
    with pytest.raises(SolverError):
        lp.add_constraint([(0, 1.0)], "<", 1.0)  # unknown relation
    with pytest.raises(SolverError):
        lp.add_constraint([(0, np.inf)], "<=", 1.0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_small_known_optimum(backend):
    lp = LpProblem()
    x = lp.add_variable("x", obj=-1.0)
    y = lp.add_variable("y", obj=-1.0)
    lp.add_constraint([(x, 1.0), (y, 1.0)], "<=", 1.0)
    sol = _solve(lp, backend)
    assert sol.status == STATUS_OPTIMAL
    assert sol.objective == pytest.approx(-1.0, abs=1e-9)
    assert sol.value(x) + sol.value(y) == pytest.approx(1.0, abs=1e-9)
    # reported objective is literally c.x
    assert sol.objective == pytest.approx(-(sol.value("x") + sol.value("y")), rel=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_equality_and_fixed_bounds(backend):
    lp = LpProblem()
    x = lp.add_variable("x", lb=0.0, ub=10.0, obj=1.0)
    y = lp.add_variable("y", lb=3.0, ub=3.0, obj=1.0)
    lp.add_constraint([(x, 1.0)], "=", 5.0)
    sol = _solve(lp, backend)
    assert sol.status == STATUS_OPTIMAL
    assert sol.value(x) == pytest.approx(5.0, abs=1e-9)
    assert sol.value(y) == pytest.approx(3.0, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_free_variable_and_negative_optimum(backend):
    lp = LpProblem()
    x = lp.add_variable("x", lb=-INFINITY, ub=INFINITY, obj=1.0)
    lp.add_constraint([(x, 1.0)], ">=", -3.0)
    sol = _solve(lp, backend)
    assert sol.status == STATUS_OPTIMAL
    assert sol.objective == pytest.approx(-3.0, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_bound_flip_path(backend):
    lp = LpProblem()
    x = lp.add_variable("x", lb=0.0, ub=7.0, obj=-1.0)
    lp.add_constraint([(x, 1.0)], "<=", 100.0)
    sol = _solve(lp, backend)
    assert sol.objective == pytest.approx(-7.0, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible(backend):
    lp = LpProblem()
    x = lp.add_variable("x", lb=0.0, ub=1.0)
    lp.add_constraint([(x, 1.0)], ">=", 2.0)
    assert _solve(lp, backend).status == STATUS_INFEASIBLE


@pytest.mark.parametrize("backend", BACKENDS)
def test_unbounded(backend):
    lp = LpProblem()
    x = lp.add_variable("x", obj=-1.0)
    lp.add_constraint([(x, 1.0)], ">=", 1.0)
    assert _solve(lp, backend).status == STATUS_UNBOUNDED


def test_beale_degenerate_problem_terminates():
    # Classic cycling example; must terminate via the Bland fallback path.
    lp = LpProblem()
    x = [lp.add_variable(f"x{i}", obj=c) for i, c in enumerate([-0.75, 150.0, -0.02, 6.0])]
    lp.add_constraint([(x[0], 0.25), (x[1], -60.0), (x[2], -1 / 25), (x[3], 9.0)], "<=", 0.0)
    lp.add_constraint([(x[0], 0.5), (x[1], -90.0), (x[2], -1 / 50), (x[3], 3.0)], "<=", 0.0)
    lp.add_constraint([(x[2], 1.0)], "<=", 1.0)
    sol = _solve(lp, "simplex")
    assert sol.status == STATUS_OPTIMAL
    assert sol.objective == pytest.approx(-0.05, abs=1e-9)


def test_builder_scales_to_1e5_variables():
    lp = LpProblem()
    t0 = time.perf_counter()
    handles = [lp.add_variable(f"v{i}", lb=0.0, ub=1.0, obj=1.0) for i in range(100_000)]
    lp.add_constraint([(handles[0], 1.0), (handles[-1], 1.0)], "<=", 1.0)
    elapsed = time.perf_counter() - t0
    assert lp.n_variables == 100_000
    assert elapsed < 1.0, f"builder took {elapsed:.2f}s"


def _random_lp(rng, n=12, m=8):
    """Feasible-by-construction random LP with mixed relations and bounds."""
    lp = LpProblem("rand")
    lb = rng.uniform(-5.0, 0.0, size=n)
    ub = lb + rng.uniform(0.5, 6.0, size=n)
    kind = rng.integers(0, 4, size=n)
    lo = np.where(kind == 1, -INFINITY, lb)       # one-sided and free bounds mixed in
    hi = np.where(kind == 2, INFINITY, ub)
    lo = np.where(kind == 3, -INFINITY, lo)
    hi = np.where(kind == 3, INFINITY, hi)
    c = rng.normal(size=n)
    handles = [
        lp.add_variable(f"x{j}", lb=lo[j], ub=hi[j], obj=c[j]) for j in range(n)
    ]
    x0 = rng.uniform(np.where(kind == 0, lb, -1.0), np.where(kind == 0, ub, 1.0))
    A = rng.normal(size=(m, n)) * (rng.random(size=(m, n)) < 0.6)
    act = A @ x0
    for i in range(m):
        terms = [(handles[j], A[i, j]) for j in range(n) if A[i, j] != 0.0]
        if not terms:
            continue
        r = rng.random()
        if r < 0.4:
            lp.add_constraint(terms, "<=", act[i] + abs(rng.normal()))
        elif r < 0.8:
            lp.add_constraint(terms, ">=", act[i] - abs(rng.normal()))
        else:
            lp.add_constraint(terms, "=", act[i])
    return lp, c


def test_reference_simplex_agrees_with_tableau_oracle():
    rng = np.random.default_rng(42)
    optimal = 0
    for _ in range(200):
        lp, c = _random_lp(rng)
        got = _solve(lp, "simplex")
        want_status, want_obj, _ = tableau_simplex(
            c, lp.rows, lp.lower_array(), lp.upper_array()
        )
        if want_status == "optimal":
            optimal += 1
            assert got.status == STATUS_OPTIMAL
            assert got.objective == pytest.approx(
                want_obj, rel=1e-6, abs=1e-6
            ), f"objective mismatch vs oracle"
            assert constraint_violation(lp, got.x) < 1e-7
        else:
            assert got.status.lower() == want_status
    assert optimal >= 40  # the generator is feasible by construction


def test_backends_agree():
    rng = np.random.default_rng(7)
    for _ in range(25):
        lp, _ = _random_lp(rng, n=15, m=10)
        a = _solve(lp, "simplex")
        b = _solve(lp, "highs")
        assert a.status == b.status
        if a.status == STATUS_OPTIMAL:
            denom = max(1.0, abs(b.objective))
            assert abs(a.objective - b.objective) / denom < 1e-5


def test_time_limit_status():
    rng = np.random.default_rng(3)
    lp, _ = _random_lp(rng, n=40, m=30)
    sol = _solve(lp, "simplex", time_limit=0.0)
    assert sol.status == STATUS_TIME_LIMIT


def test_write_lp_golden():
    lp = LpProblem("tiny")
    x = lp.add_variable("x", lb=0.0, ub=4.0, obj=2.0)
    y = lp.add_variable("y[a,1]", lb=-INFINITY, ub=INFINITY, obj=-1.0)
    lp.add_constraint([(x, 1.0), (y, -2.0)], "<=", 3.0, name="cap")
    lp.add_constraint([(y, 1.0)], ">=", -1.0)
    text = write_lp(lp)
    assert text == (
        "\\ Problem: tiny\n"
        "Minimize\n"
        " obj: 2.0 x - 1.0 y_a_1_\n"
        "Subject To\n"
        " cap: 1.0 x - 2.0 y_a_1_ <= 3.0\n"
        " c1: 1.0 y_a_1_ >= -1.0\n"
        "Bounds\n"
        " 0.0 <= x <= 4.0\n"
        " y_a_1_ free\n"
        "End\n"
    )


def test_write_lp_deduplicates_collisions():
    lp = LpProblem()
    lp.add_variable("a[1]")
    lp.add_variable("a(1)")
    text = write_lp(lp)
    names = [line.split()[0] for line in text.splitlines() if line.startswith(" a")]
    assert len(set(names)) == len(names)
