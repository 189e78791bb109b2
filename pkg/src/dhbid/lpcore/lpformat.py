"""Dump an LpProblem in CPLEX-style LP text format for external cross-checks.

Round-trip fidelity of names is not guaranteed (characters the format forbids
are replaced and deduplicated deterministically); coefficient values use repr
so external solvers should reproduce objectives to full double precision.
"""

from __future__ import annotations

import re

from .problem import INFINITY, LpProblem

_BAD = re.compile(r"[^A-Za-z0-9_.!#$%&()/,;?@_'`{}|~]")


def _num(value: float) -> str:
    # plain-float repr: numpy scalars would otherwise print as np.float64(...)
    return repr(float(value))


def _sanitize_names(names: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for name in names:
        clean = _BAD.sub("_", name).replace(",", "_").replace("(", "_").replace(")", "_")
        if not clean or clean[0].isdigit() or clean[0] in ".eE":
            clean = "v_" + clean
        if clean in seen:
            seen[clean] += 1
            clean = f"{clean}__{seen[clean]}"
        seen.setdefault(clean, 0)
        out.append(clean)
    return out


def _terms(handles: list[int], coefs: list[float], names: list[str]) -> str:
    parts: list[str] = []
    for h, c in zip(handles, coefs):
        if c == 0.0:
            continue
        sign = "-" if c < 0 else "+"
        if not parts and sign == "+":
            parts.append(f"{_num(abs(c))} {names[h]}")
        else:
            parts.append(f"{sign} {_num(abs(c))} {names[h]}")
    return " ".join(parts) if parts else "0 " + names[0]


def write_lp(problem: LpProblem) -> str:
    """LP-format text of the problem (minimisation)."""
    names = _sanitize_names(problem.variable_names())
    obj = problem.objective_array()
    lb = problem.lower_array()
    ub = problem.upper_array()
    lines = [f"\\ Problem: {problem.name}", "Minimize"]
    obj_handles = [j for j in range(problem.n_variables) if obj[j] != 0.0]
    lines.append(" obj: " + _terms(obj_handles, [obj[j] for j in obj_handles], names))
    lines.append("Subject To")
    rel_map = {"<=": "<=", ">=": ">=", "=": "="}
    for i, (handles, coefs, relation, rhs, rname) in enumerate(problem.rows):
        label = _BAD.sub("_", rname) if rname else f"c{i}"
        lines.append(
            f" {label}: {_terms(handles, coefs, names)} {rel_map[relation]} {_num(rhs)}"
        )
    lines.append("Bounds")
    for j, name in enumerate(names):
        lo, hi = lb[j], ub[j]
        free_lo = lo <= -INFINITY
        free_hi = hi >= INFINITY
        if free_lo and free_hi:
            lines.append(f" {name} free")
        elif free_lo:
            lines.append(f" -inf <= {name} <= {_num(hi)}")
        elif free_hi:
            if lo != 0.0:
                lines.append(f" {name} >= {_num(lo)}")
        elif lo == hi:
            lines.append(f" {name} = {_num(lo)}")
        else:
            lines.append(f" {_num(lo)} <= {name} <= {_num(hi)}")
    lines.append("End")
    return "\n".join(lines) + "\n"
