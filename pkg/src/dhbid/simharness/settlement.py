"""Hourly settlement: re-dispatch against realized data and book the cash.

Once the day-ahead volume is committed and the TSO has (or has not)
activated regulation, the hour is settled by a deterministic re-dispatch:
the balancing-shaped LP over the remaining lookahead with a single scenario
whose hour 0 carries the realized prices and renewable output, commitments
and cleared regulation pinned, and future hours gated off regulation. Hour 0
of that solution is executed; its storage levels open the next hour.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping, Sequence

import numpy as np

from ..errors import DataError
from ..lpcore import LpOptions, solve
from ..portfolio import KIND_CHP, KIND_ELECTRIC_HEAT, Portfolio
from ..scengen import BalancingScenarioSet, ScenarioSet
from ..stochmodels import build_balancing, penalty_prices
from .clearing import REG_DOWN, REG_UP, MarketOutcome

log = logging.getLogger(__name__)

# a cleared volume this small is treated as no activation when checking
# consistency against the hour's regulation state
VOLUME_EPS = 1e-9


@dataclass(frozen=True)
class LedgerEntry:
    """One settled hour: volumes, cost components, and closing state.

    ``total_cost`` is stored as computed at settlement time; reports and
    tests rebuild it from the components (heat + tariff - day-ahead revenue
    - up revenue + down payments + imbalance) and expect bit equality.
    ``power_by_unit`` records CHP output, full renewable production, and
    electric-boiler draw as a negative number.
    """

    when: datetime
    dayahead_price: float
    up_price: float
    down_price: float
    regulation_state: str
    committed: float
    cleared_up: float
    cleared_down: float
    delivered: float
    imbalance_plus: float
    imbalance_minus: float
    heat_cost: float
    tariff_cost: float
    dayahead_revenue: float
    up_revenue: float
    down_cost: float
    imbalance_cost: float
    total_cost: float
    heat_short: float
    heat_dump: float
    levels: dict[str, float]
    heat_by_unit: dict[str, float]
    power_by_unit: dict[str, float]


@dataclass
class SettlementLedger:
    """Chronological settled hours with running totals."""

    entries: list[LedgerEntry] = field(default_factory=list)

    def append(self, entry: LedgerEntry) -> None:
        if self.entries and entry.when <= self.entries[-1].when:
            raise DataError(
                f"ledger entries must advance in time "
                f"({entry.when.isoformat()} after {self.entries[-1].when.isoformat()})"
            )
        self.entries.append(entry)

    def extend(self, entries: Sequence[LedgerEntry]) -> None:
        for entry in entries:
            self.append(entry)

    @property
    def total_cost(self) -> float:
        return float(sum(e.total_cost for e in self.entries))

    def component_totals(self) -> dict[str, float]:
        keys = (
            "heat_cost",
            "tariff_cost",
            "dayahead_revenue",
            "up_revenue",
            "down_cost",
            "imbalance_cost",
        )
        return {k: float(sum(getattr(e, k) for e in self.entries)) for k in keys}


def resolve_actuals(
    portfolio: Portfolio,
    commitments: Sequence[float],
    activations: tuple[float, float],
    realized_res: Mapping[str, np.ndarray],
    demand: Sequence[float],
    storage_state: Mapping[str, float] | None,
    outcome: MarketOutcome,
    dayahead_prices: Sequence[float],
    when: datetime,
    options: LpOptions | None = None,
) -> LedgerEntry:
    """Settle one hour; arrays cover the remaining lookahead (hour 0 first).

    ``commitments`` and ``dayahead_prices`` span the lookahead so the
    re-dispatch values storage against the hours still to come; regulation
    beyond hour 0 is priced at the day-ahead level, i.e. switched off.
    Cleared volumes in a direction the hour's prices never activated are a
    data inconsistency, as is an infeasible re-dispatch.
    """
    commitments = np.asarray(commitments, dtype=float)
    lam = np.asarray(dayahead_prices, dtype=float)
    horizon = len(commitments)
    if horizon < 1:
        raise DataError("settlement needs at least the hour being settled")
    if lam.shape != commitments.shape:
        raise DataError("day-ahead prices must match the commitment lookahead")
    if abs(lam[0] - outcome.dayahead_price) > 1e-9:
        raise DataError(
            f"hour price {lam[0]} disagrees with the outcome "
            f"({outcome.dayahead_price})"
        )
    up0, down0 = (float(v) for v in activations)
    if up0 > VOLUME_EPS and outcome.regulation_state != REG_UP:
        raise DataError(
            f"{when.isoformat()}: cleared up regulation {up0} in an hour "
            f"with state {outcome.regulation_state}"
        )
    if down0 > VOLUME_EPS and outcome.regulation_state != REG_DOWN:
        raise DataError(
            f"{when.isoformat()}: cleared down regulation {down0} in an hour "
            f"with state {outcome.regulation_state}"
        )

    up_row = lam.copy()
    down_row = lam.copy()
    up_row[0] = outcome.up_price
    down_row[0] = outcome.down_price
    res_sets = {
        uid: ScenarioSet(uid, np.asarray(traj, dtype=float)[None, :horizon], np.ones(1))
        for uid, traj in realized_res.items()
    }
    scenarios = BalancingScenarioSet(
        up=ScenarioSet("UpPrice", up_row[None, :], np.ones(1)),
        down=ScenarioSet("DownPrice", down_row[None, :], np.ones(1)),
        res=res_sets,
    )
    problem, idx = build_balancing(
        portfolio,
        commitments,
        lam,
        scenarios,
        np.asarray(demand, dtype=float),
        storage_state=storage_state,
        horizon=horizon,
        fixed_regulation=(up0, down0),
        name=f"settle_{when.isoformat()}",
    )
    sol = solve(problem, options)
    if not sol.is_optimal:
        raise DataError(
            f"{when.isoformat()}: settlement re-dispatch ended {sol.status}; "
            "committed volumes and realized data are inconsistent"
        )

    heat_cost = 0.0
    tariff_cost = 0.0
    heat_by_unit: dict[str, float] = {}
    power_by_unit: dict[str, float] = {}
    for u in portfolio.heat_units:
        q0 = sol.value(idx.q[(u.id, 0, 0)])
        heat_by_unit[u.id] = q0
        if u.kind == KIND_ELECTRIC_HEAT:
            draw = sol.value(idx.p_grid[(u.id, 0, 0)])
            heat_cost += u.heat_cost * draw
            for gid in sorted(u.tariffs):
                fed = sol.value(idx.p_heat[(gid, u.id, 0, 0)])
                tariff_cost += u.tariffs[gid] * fed
                draw += fed
            power_by_unit[u.id] = -draw
        else:
            heat_cost += u.heat_cost * q0
        if u.kind == KIND_CHP:
            power_by_unit[u.id] = sol.value(idx.p_chp[(u.id, 0, 0)])
    for g in portfolio.res_generators:
        power_by_unit[g.id] = float(realized_res[g.id][0])

    delivered = sum(
        sol.value(idx.p_chp[(u.id, 0, 0)]) for u in portfolio.chp_units
    ) + sum(
        sol.value(idx.p_gen[(g.id, 0, 0)]) for g in portfolio.res_generators
    ) - sum(
        sol.value(idx.p_grid[(u.id, 0, 0)]) for u in portfolio.electric_heat_units
    )
    buy = sol.value(idx.p_buy[(0, 0)])
    sell = sol.value(idx.p_sell[(0, 0)])
    pen = penalty_prices(
        np.asarray([outcome.dayahead_price]),
        portfolio.beta,
        up=np.asarray([outcome.up_price]),
        down=np.asarray([outcome.down_price]),
    )
    imbalance_cost = float(pen.plus[0]) * buy - float(pen.minus[0]) * sell

    dayahead_revenue = outcome.dayahead_price * float(commitments[0])
    up_revenue = outcome.up_price * up0
    down_cost = outcome.down_price * down0
    total_cost = (
        heat_cost
        + tariff_cost
        - dayahead_revenue
        - up_revenue
        + down_cost
        + imbalance_cost
    )
    short = sol.value(idx.heat_short[(0, 0)])
    dump = sol.value(idx.heat_dump[(0, 0)])
    if short > 1e-6 or dump > 1e-6:
        log.warning(
            "%s: heat balance needed slack (short %.3f, dump %.3f MWh)",
            when.isoformat(), short, dump,
        )
    levels = {
        sid: sol.value(idx.storage_level[(sid, 0, 0)])
        for sid in portfolio.storages
    }
    for sid, level in levels.items():
        s = portfolio.storages[sid]
        if not s.s_min - 1e-6 <= level <= s.s_max + 1e-6:
            raise DataError(
                f"{when.isoformat()}: storage {sid} settled at {level}, "
                f"outside [{s.s_min}, {s.s_max}]"
            )

    # realized prices arrive as numpy scalars; the ledger is the public
    # record, so every number is stored as a plain float
    return LedgerEntry(
        when=when,
        dayahead_price=float(outcome.dayahead_price),
        up_price=float(outcome.up_price),
        down_price=float(outcome.down_price),
        regulation_state=outcome.regulation_state,
        committed=float(commitments[0]),
        cleared_up=float(up0),
        cleared_down=float(down0),
        delivered=float(delivered),
        imbalance_plus=float(buy),
        imbalance_minus=float(sell),
        heat_cost=float(heat_cost),
        tariff_cost=float(tariff_cost),
        dayahead_revenue=float(dayahead_revenue),
        up_revenue=float(up_revenue),
        down_cost=float(down_cost),
        imbalance_cost=float(imbalance_cost),
        total_cost=float(total_cost),
        heat_short=float(short),
        heat_dump=float(dump),
        levels={sid: float(v) for sid, v in levels.items()},
        heat_by_unit={uid: float(v) for uid, v in heat_by_unit.items()},
        power_by_unit={uid: float(v) for uid, v in power_by_unit.items()},
    )
