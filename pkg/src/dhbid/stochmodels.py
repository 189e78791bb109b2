"""Two-stage stochastic programs for day-ahead and balancing-market bidding.

The physical core shared by both markets replicates, per hour t and joint
scenario w: unit capacity limits, the split of heat between network and
storages, CHP and electric-boiler power couplings, must-run renewable heat,
storage balances with carryover, the hourly heat balance, and the split of
renewable power between the market and paired electric boilers.

On top of that core,

* ``build_dayahead`` adds a free power bid per hour with imbalance penalties
  and per-hour ordering constraints that force the bids of the first
  ``first_stage_hours`` hours onto one nondecreasing curve per hour;
* ``build_balancing`` takes the day-ahead commitment as data and offers
  upward/downward regulation, with only the next hour's offers shared across
  scenarios (the balancing gate closes an hour ahead of delivery).

Hour indices are 0-based offsets from the planning-window start everywhere.
"""

from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, SolverError
from .lpcore import INFINITY, LpProblem, LpSolution
from .portfolio import KIND_CHP, KIND_ELECTRIC_HEAT, Portfolio
from .scengen import (
    ACTIVATION_DEAD_BAND,
    BalancingScenarioSet,
    JointScenarioSet,
    ScenarioSet,
)

log = logging.getLogger(__name__)

# cost per MWh of unserved or dumped heat; dominates every market price so a
# positive slack always marks a physically impossible hour, not a trade-off
HEAT_SLACK_COST = 1e6

# quantities at one price must agree to this tolerance when reading curves
CURVE_MERGE_TOL = 1e-6

CURVE_DAY_AHEAD = "DayAhead"
CURVE_UP = "UpRegulation"
CURVE_DOWN = "DownRegulation"
CURVE_KINDS = (CURVE_DAY_AHEAD, CURVE_UP, CURVE_DOWN)


# ---------------------------------------------------------------------------
# Penalty prices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PenaltyPrices:
    """Imbalance settlement prices; ``minus <= spot <= plus`` elementwise."""

    plus: np.ndarray   # paid per MWh bought to cover a shortfall
    minus: np.ndarray  # received per MWh of surplus sold


def penalty_prices(
    dayahead: np.ndarray | float,
    beta: float,
    up: np.ndarray | None = None,
    down: np.ndarray | None = None,
) -> PenaltyPrices:
    """Settlement prices bracketing the spot price.

    Day-ahead context (``up``/``down`` omitted): shortfalls are bought at
    spot*(1+beta) and surplus sold at spot*(1-beta), with the factors swapped
    for negative spot prices so an imbalance is never rewarded.

    Balancing context: hours whose regulation price actually moved away from
    the spot price (beyond the activation dead band) settle against that
    regulation price instead, with the same markup/markdown applied; the sign
    branch still follows the spot price.
    """
    lam = np.asarray(dayahead, dtype=float)
    if not np.isfinite(beta) or beta <= 0:
        raise DataError(f"beta must be positive and finite, got {beta}")
    plus_base = lam
    minus_base = lam
    if up is not None:
        up = np.asarray(up, dtype=float)
        plus_base = np.where(up > lam + ACTIVATION_DEAD_BAND, up, lam)
    if down is not None:
        down = np.asarray(down, dtype=float)
        minus_base = np.where(down < lam - ACTIVATION_DEAD_BAND, down, lam)
    markup = np.where(lam >= 0, 1.0 + beta, 1.0 - beta)
    markdown = np.where(lam >= 0, 1.0 - beta, 1.0 + beta)
    return PenaltyPrices(plus=plus_base * markup, minus=minus_base * markdown)


# ---------------------------------------------------------------------------
# Variable index and the shared physical core
# ---------------------------------------------------------------------------


@dataclass
class VariableIndex:
    """Variable handles of one built market problem.

    Keys are ``(unit_id, t, w)`` unless noted: ``q_store`` uses ``(unit_id,
    storage_id, t, w)``, ``p_heat`` uses ``(gen_id, unit_id, t, w)``, storage
    fields use ``(storage_id, t, w)`` and market fields use ``(t, w)``.
    ``t`` is the hour offset from the window start, ``w`` the joint-scenario
    index. ``storage_level`` holds the fill at the end of hour ``t``.
    """

    horizon: int
    count: int
    q: dict[tuple[str, int, int], int] = field(default_factory=dict)
    q_dh: dict[tuple[str, int, int], int] = field(default_factory=dict)
    q_store: dict[tuple[str, str, int, int], int] = field(default_factory=dict)
    p_chp: dict[tuple[str, int, int], int] = field(default_factory=dict)
    p_grid: dict[tuple[str, int, int], int] = field(default_factory=dict)
    p_heat: dict[tuple[str, str, int, int], int] = field(default_factory=dict)
    p_gen: dict[tuple[str, int, int], int] = field(default_factory=dict)
    storage_level: dict[tuple[str, int, int], int] = field(default_factory=dict)
    storage_out: dict[tuple[str, int, int], int] = field(default_factory=dict)
    heat_short: dict[tuple[int, int], int] = field(default_factory=dict)
    heat_dump: dict[tuple[int, int], int] = field(default_factory=dict)
    p_bid: dict[tuple[int, int], int] = field(default_factory=dict)
    p_buy: dict[tuple[int, int], int] = field(default_factory=dict)
    p_sell: dict[tuple[int, int], int] = field(default_factory=dict)
    p_up: dict[tuple[int, int], int] = field(default_factory=dict)
    p_down: dict[tuple[int, int], int] = field(default_factory=dict)


def build_shared_constraints(
    portfolio: Portfolio,
    scenarios: JointScenarioSet | BalancingScenarioSet,
    demand: np.ndarray,
    storage_init: Mapping[str, float] | None,
    horizon: int,
    builder: LpProblem,
) -> VariableIndex:
    """Emit the physical constraints every market problem shares.

    Adds, for each hour and joint scenario: production within capacity, the
    network/storage heat split masked by configured connections, CHP and
    electric-boiler couplings, must-run heat pinned to its trajectory,
    storage balances starting from ``storage_init`` (portfolio initial fill
    if omitted) with the end level bounded below by the start, the heat
    balance with high-cost shortfall/dump slacks, and the renewable power
    split. Objective terms carry the scenario probability.
    """
    demand = np.asarray(demand, dtype=float)
    if demand.ndim != 1:
        raise DataError("demand must be a 1-d array")
    if horizon <= 0:
        raise DataError("horizon must cover at least one hour")
    if len(demand) != horizon:
        raise DataError(f"demand covers {len(demand)} hours, horizon is {horizon}")
    if not np.all(np.isfinite(demand)) or np.any(demand < 0):
        raise DataError("demand must be finite and non-negative")
    if scenarios.horizon < horizon:
        raise DataError(
            f"scenario horizon {scenarios.horizon} shorter than the window ({horizon}h)"
        )

    levels = {sid: s.s_initial for sid, s in portfolio.storages.items()}
    if storage_init:
        for sid, level in storage_init.items():
            if sid not in levels:
                raise DataError(f"unknown storage {sid!r} in initial levels")
            levels[sid] = float(level)
    for sid, level in levels.items():
        s = portfolio.storages[sid]
        if not s.s_min - 1e-9 <= level <= s.s_max + 1e-9:
            raise DataError(
                f"storage {sid!r} carryover level {level} outside [{s.s_min}, {s.s_max}]"
            )
        # solver noise in a settled level must not cross the box bounds it
        # is about to become (end-of-window floor vs capacity)
        levels[sid] = min(max(level, s.s_min), s.s_max)

    must_run = portfolio.stochastic_heat_units
    generators = portfolio.res_generators
    for u in must_run + generators:
        if u.id not in scenarios.res:
            raise DataError(f"no scenario trajectories for unit {u.id!r}")
    for g in generators:
        if np.any(scenarios.res[g.id].trajectories[:, :horizon] < 0):
            raise DataError(f"unit {g.id!r}: trajectories carry negative output")
    # must-run heat follows the weather; the configured capacity is a
    # non-binding cap, so out-of-range trajectory values are clamped, not fatal
    run_all: dict[str, np.ndarray] = {}
    for u in must_run:
        traj = scenarios.res[u.id].trajectories[:, :horizon]
        clipped = np.clip(traj, 0.0, u.q_max)
        changed = int(np.count_nonzero(clipped != traj))
        if changed:
            log.warning(
                "unit %s: %d trajectory values clamped into [0, %g]",
                u.id, changed, u.q_max,
            )
        run_all[u.id] = clipped

    heat_units = portfolio.heat_units
    electric = portfolio.electric_heat_units
    feeders = {
        sid: [u for u in heat_units if sid in u.storages] for sid in portfolio.storages
    }

    idx = VariableIndex(horizon=horizon, count=scenarios.count)
    add_var = builder.add_variable
    add_row = builder.add_constraint

    for w in range(scenarios.count):
        pi = float(scenarios.probabilities[w])
        j = scenarios.res_row(w)
        run = {uid: clipped[j] for uid, clipped in run_all.items()}

        for u in heat_units:
            uid = u.id
            fixed = run.get(uid)
            cap = INFINITY if fixed is not None else u.q_max
            obj_q = 0.0 if u.kind == KIND_ELECTRIC_HEAT else pi * u.heat_cost
            for t in range(horizon):
                if fixed is None:
                    qv = add_var(f"q_{uid}_t{t}_w{w}", u.q_min, u.q_max, obj_q)
                else:
                    qv = add_var(f"q_{uid}_t{t}_w{w}", fixed[t], fixed[t], obj_q)
                idx.q[(uid, t, w)] = qv
                # production splits into the network share and storage inflows,
                # masked by the configured connections
                dh = add_var(f"qdh_{uid}_t{t}_w{w}", 0.0, cap if u.dh_connected else 0.0)
                idx.q_dh[(uid, t, w)] = dh
                split = [(qv, 1.0), (dh, -1.0)]
                for sid in u.storages:
                    qs = add_var(f"qs_{uid}_{sid}_t{t}_w{w}", 0.0, cap)
                    idx.q_store[(uid, sid, t, w)] = qs
                    split.append((qs, -1.0))
                add_row(split, "=", 0.0, f"split_{uid}_t{t}_w{w}")

                if u.kind == KIND_CHP:
                    pc = add_var(
                        f"pchp_{uid}_t{t}_w{w}",
                        0.0,
                        INFINITY if u.p_max is None else u.p_max,
                    )
                    idx.p_chp[(uid, t, w)] = pc
                    # back-pressure operation locks heat to power output
                    add_row([(qv, 1.0), (pc, -u.phi)], "=", 0.0, f"chp_{uid}_t{t}_w{w}")
                elif u.kind == KIND_ELECTRIC_HEAT:
                    pg = add_var(f"pgrid_{uid}_t{t}_w{w}", 0.0, INFINITY, pi * u.heat_cost)
                    idx.p_grid[(uid, t, w)] = pg
                    coupling = [(qv, 1.0), (pg, -u.phi)]
                    for gid in sorted(u.tariffs):
                        ph = add_var(
                            f"pheat_{gid}_{uid}_t{t}_w{w}", 0.0, INFINITY, pi * u.tariffs[gid]
                        )
                        idx.p_heat[(gid, uid, t, w)] = ph
                        coupling.append((ph, -u.phi))
                    add_row(coupling, "=", 0.0, f"el_{uid}_t{t}_w{w}")

        for g in generators:
            gid = g.id
            taking = [u for u in electric if gid in u.tariffs]
            traj = scenarios.res[gid].trajectories[j]
            for t in range(horizon):
                pg = add_var(f"pgen_{gid}_t{t}_w{w}", 0.0, INFINITY)
                idx.p_gen[(gid, t, w)] = pg
                # scenario power splits between the market and paired boilers
                res_split = [(pg, 1.0)]
                res_split += [(idx.p_heat[(gid, u.id, t, w)], 1.0) for u in taking]
                add_row(res_split, "=", float(traj[t]), f"res_{gid}_t{t}_w{w}")

        for sid, s in portfolio.storages.items():
            s0 = levels[sid]
            prev = -1
            for t in range(horizon):
                # the closing level may not undercut the opening one
                lo = max(s.s_min, s0) if t == horizon - 1 else s.s_min
                lv = add_var(f"sig_{sid}_t{t}_w{w}", lo, s.s_max)
                out = add_var(f"sout_{sid}_t{t}_w{w}", 0.0, s.s_max)
                idx.storage_level[(sid, t, w)] = lv
                idx.storage_out[(sid, t, w)] = out
                balance = [(lv, 1.0), (out, 1.0)]
                balance += [
                    (idx.q_store[(u.id, sid, t, w)], -1.0) for u in feeders[sid]
                ]
                if t > 0:
                    balance.append((prev, -1.0))
                add_row(balance, "=", s0 if t == 0 else 0.0, f"store_{sid}_t{t}_w{w}")
                prev = lv

        for t in range(horizon):
            short = add_var(f"short_t{t}_w{w}", 0.0, INFINITY, pi * HEAT_SLACK_COST)
            dump = add_var(f"dump_t{t}_w{w}", 0.0, INFINITY, pi * HEAT_SLACK_COST)
            idx.heat_short[(t, w)] = short
            idx.heat_dump[(t, w)] = dump
            heat = [(idx.q_dh[(u.id, t, w)], 1.0) for u in heat_units]
            heat += [(idx.storage_out[(sid, t, w)], 1.0) for sid in portfolio.storages]
            heat += [(short, 1.0), (dump, -1.0)]
            add_row(heat, "=", float(demand[t]), f"heat_t{t}_w{w}")

    return idx


def worst_heat_slack(solution: LpSolution, index: VariableIndex) -> float:
    """Largest unserved/dumped heat in any hour and scenario; 0 when healthy."""
    worst = 0.0
    for handle in index.heat_short.values():
        worst = max(worst, solution.value(handle))
    for handle in index.heat_dump.values():
        worst = max(worst, solution.value(handle))
    return worst


def _power_terms(
    portfolio: Portfolio, idx: VariableIndex, t: int, w: int
) -> list[tuple[int, float]]:
    # net power available to the market: CHP + generators - boiler grid draw
    terms = [(idx.p_chp[(u.id, t, w)], 1.0) for u in portfolio.chp_units]
    terms += [(idx.p_gen[(g.id, t, w)], 1.0) for g in portfolio.res_generators]
    terms += [(idx.p_grid[(u.id, t, w)], -1.0) for u in portfolio.electric_heat_units]
    return terms


def _order_first_stage(
    builder: LpProblem,
    handles: Mapping[tuple[int, int], int],
    prices: np.ndarray,
    scenarios: JointScenarioSet | BalancingScenarioSet,
    hours: Iterable[int],
    tag: str,
    decreasing: bool,
) -> None:
    """Adjacent ordering rows after a per-hour price sort; ties become equalities."""
    rows = np.array([scenarios.price_row(w) for w in range(scenarios.count)])
    for t in hours:
        lam_w = prices[rows, t]
        order = np.argsort(lam_w, kind="stable")
        for a, b in zip(order[:-1], order[1:]):
            pair = [(handles[(t, int(a))], 1.0), (handles[(t, int(b))], -1.0)]
            if lam_w[a] == lam_w[b]:
                builder.add_constraint(pair, "=", 0.0, f"{tag}eq_t{t}_w{a}_w{b}")
            elif decreasing:
                builder.add_constraint(pair, ">=", 0.0, f"{tag}ord_t{t}_w{a}_w{b}")
            else:
                builder.add_constraint(pair, "<=", 0.0, f"{tag}ord_t{t}_w{a}_w{b}")


# ---------------------------------------------------------------------------
# Market problems
# ---------------------------------------------------------------------------


def build_dayahead(
    portfolio: Portfolio,
    scenarios: JointScenarioSet,
    demand: np.ndarray,
    storage_init: Mapping[str, float] | None = None,
    horizon: int = 72,
    first_stage_hours: int = 24,
    fixed_bids: Sequence[float] | None = None,
    name: str = "dayahead",
) -> tuple[LpProblem, VariableIndex]:
    """Day-ahead bidding problem over ``horizon`` hours.

    Hours below ``first_stage_hours`` carry ordering constraints that tie the
    bid to the hour's price rank (equal prices force equal bids), so those
    bids form one nondecreasing curve per hour; later hours re-optimize per
    scenario and only value storage carryover. ``fixed_bids`` pins the
    first-stage bids instead, which turns the model into an evaluator of an
    externally chosen bid vector (expected-value policies, ablations).
    """
    if first_stage_hours <= 0:
        raise DataError("first_stage_hours must be positive")
    if horizon < first_stage_hours:
        raise DataError(
            f"horizon {horizon} shorter than the committed bidding window "
            f"({first_stage_hours}h)"
        )
    builder = LpProblem(name)
    idx = build_shared_constraints(
        portfolio, scenarios, demand, storage_init, horizon, builder
    )
    lam = scenarios.price.trajectories
    pen = penalty_prices(lam[:, :horizon], portfolio.beta)
    for w in range(scenarios.count):
        pi = float(scenarios.probabilities[w])
        i = scenarios.price_row(w)
        for t in range(horizon):
            bid = builder.add_variable(
                f"pbid_t{t}_w{w}", -INFINITY, INFINITY, -pi * lam[i, t]
            )
            buy = builder.add_variable(
                f"pbuy_t{t}_w{w}", 0.0, INFINITY, pi * pen.plus[i, t]
            )
            sell = builder.add_variable(
                f"psell_t{t}_w{w}", 0.0, INFINITY, -pi * pen.minus[i, t]
            )
            idx.p_bid[(t, w)] = bid
            idx.p_buy[(t, w)] = buy
            idx.p_sell[(t, w)] = sell
            # sold volume equals net production corrected by imbalances
            power = _power_terms(portfolio, idx, t, w)
            power += [(buy, 1.0), (sell, -1.0), (bid, -1.0)]
            builder.add_constraint(power, "=", 0.0, f"power_t{t}_w{w}")
    _order_first_stage(
        builder, idx.p_bid, lam, scenarios, range(first_stage_hours), "bid",
        decreasing=False,
    )
    if fixed_bids is not None:
        fixed = np.asarray(fixed_bids, dtype=float)
        if fixed.shape != (first_stage_hours,) or not np.all(np.isfinite(fixed)):
            raise DataError(f"fixed_bids must be {first_stage_hours} finite values")
        for t in range(first_stage_hours):
            for w in range(scenarios.count):
                builder.add_constraint(
                    [(idx.p_bid[(t, w)], 1.0)], "=", float(fixed[t]), f"fix_t{t}_w{w}"
                )
    return builder, idx


def build_balancing(
    portfolio: Portfolio,
    committed: Sequence[float],
    dayahead_prices: Sequence[float],
    scenarios: BalancingScenarioSet,
    demand: np.ndarray,
    storage_state: Mapping[str, float] | None = None,
    horizon: int = 12,
    fixed_regulation: tuple[float, float] | None = None,
    name: str = "balancing",
) -> tuple[LpProblem, VariableIndex]:
    """Balancing-market problem for the next ``horizon`` hours.

    ``committed`` is the day-ahead volume already sold per hour and
    ``dayahead_prices`` the prices it cleared at; both are data here. Only
    hour 0 regulation offers carry ordering constraints (the market gate
    closes one hour ahead), later hours are recourse. Imbalances settle at
    penalty prices keyed on whether each scenario's regulation price actually
    moved away from the day-ahead price, and regulation can only be offered
    in scenario-hours whose price shows that direction was activated (without
    that restriction, any hour with an up price above the down price would
    admit unbounded up-and-down round trips). ``fixed_regulation`` pins
    hour-0 (up, down) volumes for evaluating an already-submitted offer.
    """
    committed = np.asarray(committed, dtype=float)
    lam = np.asarray(dayahead_prices, dtype=float)
    if committed.shape != (horizon,) or not np.all(np.isfinite(committed)):
        raise DataError(f"committed volumes must be {horizon} finite values")
    if lam.shape != (horizon,) or not np.all(np.isfinite(lam)):
        raise DataError(f"day-ahead prices must be {horizon} finite values")
    builder = LpProblem(name)
    idx = build_shared_constraints(
        portfolio, scenarios, demand, storage_state, horizon, builder
    )
    up = scenarios.up.trajectories[:, :horizon]
    down = scenarios.down.trajectories[:, :horizon]
    up_active = up > lam + ACTIVATION_DEAD_BAND
    down_active = down < lam - ACTIVATION_DEAD_BAND
    if np.any(up_active & down_active):
        i, t = np.argwhere(up_active & down_active)[0]
        raise DataError(
            f"scenario {i} hour {t}: up and down regulation both active; "
            "one direction per hour is required"
        )
    pen = penalty_prices(np.broadcast_to(lam, up.shape), portfolio.beta, up=up, down=down)
    for w in range(scenarios.count):
        pi = float(scenarios.probabilities[w])
        i = scenarios.price_row(w)
        for t in range(horizon):
            buy = builder.add_variable(
                f"pbuy_t{t}_w{w}", 0.0, INFINITY, pi * pen.plus[i, t]
            )
            sell = builder.add_variable(
                f"psell_t{t}_w{w}", 0.0, INFINITY, -pi * pen.minus[i, t]
            )
            pu = builder.add_variable(
                f"pup_t{t}_w{w}",
                0.0,
                INFINITY if up_active[i, t] else 0.0,
                -pi * up[i, t],
            )
            pd = builder.add_variable(
                f"pdown_t{t}_w{w}",
                0.0,
                INFINITY if down_active[i, t] else 0.0,
                pi * down[i, t],
            )
            idx.p_buy[(t, w)] = buy
            idx.p_sell[(t, w)] = sell
            idx.p_up[(t, w)] = pu
            idx.p_down[(t, w)] = pd
            # the committed volume is met by production, regulation or imbalances
            power = _power_terms(portfolio, idx, t, w)
            power += [(buy, 1.0), (sell, -1.0), (pu, -1.0), (pd, 1.0)]
            builder.add_constraint(power, "=", float(committed[t]), f"power_t{t}_w{w}")
    _order_first_stage(builder, idx.p_up, up, scenarios, range(1), "up", decreasing=False)
    _order_first_stage(builder, idx.p_down, down, scenarios, range(1), "down", decreasing=True)
    if fixed_regulation is not None:
        up0, down0 = (float(v) for v in fixed_regulation)
        if not (np.isfinite(up0) and np.isfinite(down0)) or up0 < 0 or down0 < 0:
            raise DataError("fixed regulation volumes must be finite and non-negative")
        for w in range(scenarios.count):
            builder.add_constraint([(idx.p_up[(0, w)], 1.0)], "=", up0, f"fixup_w{w}")
            builder.add_constraint([(idx.p_down[(0, w)], 1.0)], "=", down0, f"fixdown_w{w}")
    return builder, idx


def expected_value_scenarios(scenarios: JointScenarioSet) -> JointScenarioSet:
    """Single-scenario set at the probability-weighted mean trajectories.

    Solving on this set yields the expected-value policy whose first-stage
    bids can be re-evaluated on the full set (via ``fixed_bids``) to measure
    the value of the stochastic solution.
    """

    def mean_of(sset: ScenarioSet) -> ScenarioSet:
        mean = sset.probabilities @ sset.trajectories
        return ScenarioSet(
            label=sset.label, trajectories=mean[None, :], probabilities=np.ones(1)
        )

    return JointScenarioSet(
        price=mean_of(scenarios.price),
        res={name: mean_of(sset) for name, sset in scenarios.res.items()},
    )


# ---------------------------------------------------------------------------
# Bidding curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BidCurve:
    """Stepwise offer for one hour: (price, volume) sorted by price.

    Day-ahead and up-regulation volumes are nondecreasing in price,
    down-regulation volumes nonincreasing; regulation volumes are >= 0 while
    day-ahead volumes may be negative (net consumption).
    """

    hour: int
    kind: str
    steps: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if self.kind not in CURVE_KINDS:
            raise DataError(f"unknown curve kind {self.kind!r}")
        if not self.steps:
            raise DataError("curve needs at least one step")
        steps = tuple((float(p), float(q)) for p, q in self.steps)
        object.__setattr__(self, "steps", steps)
        prices = [p for p, _ in steps]
        volumes = [q for _, q in steps]
        if any(not np.isfinite(p) or not np.isfinite(q) for p, q in steps):
            raise DataError(f"hour {self.hour} {self.kind}: non-finite step")
        if any(b <= a for a, b in zip(prices, prices[1:])):
            raise DataError(f"hour {self.hour} {self.kind}: prices must strictly increase")
        sign = -1.0 if self.kind == CURVE_DOWN else 1.0
        if any(sign * (b - a) < 0 for a, b in zip(volumes, volumes[1:])):
            raise DataError(f"hour {self.hour} {self.kind}: volumes out of order")
        if self.kind != CURVE_DAY_AHEAD and volumes and min(volumes) < 0:
            raise DataError(f"hour {self.hour} {self.kind}: volumes must be >= 0")

    def quantity_at(self, price: float) -> float:
        """Volume cleared at ``price``: the step at the highest bid price at
        or below it, extended flat past both ends of the curve."""
        k = bisect_right([p for p, _ in self.steps], float(price)) - 1
        return self.steps[max(k, 0)][1]


def extract_bid_curves(
    solution: LpSolution,
    index: VariableIndex,
    scenarios: JointScenarioSet | BalancingScenarioSet,
    hours: Iterable[int],
    kind: str = CURVE_DAY_AHEAD,
) -> list[BidCurve]:
    """Read the hourly offer curves out of an optimal solution.

    Steps are the per-scenario (price, volume) pairs sorted by price; volumes
    at one price must agree within ``CURVE_MERGE_TOL`` (they are tied by
    equality constraints) and merge by averaging. Violations beyond the
    tolerance, in either the merge or the monotone order, mean the ordering
    constraints did not bind and raise ``SolverError``; only pass first-stage
    hours.
    """
    if not solution.is_optimal:
        raise SolverError(f"cannot read curves from a {solution.status} solution")
    if index.count != scenarios.count:
        raise DataError("scenario set does not match the model index")
    if kind == CURVE_DAY_AHEAD:
        price_set, handles = scenarios.price, index.p_bid
    elif kind == CURVE_UP:
        price_set, handles = scenarios.up, index.p_up
    elif kind == CURVE_DOWN:
        price_set, handles = scenarios.down, index.p_down
    else:
        raise DataError(f"unknown curve kind {kind!r}")

    sign = -1.0 if kind == CURVE_DOWN else 1.0
    curves = []
    for t in hours:
        by_price: dict[float, list[float]] = {}
        for w in range(scenarios.count):
            price = float(price_set.trajectories[scenarios.price_row(w), t])
            by_price.setdefault(price, []).append(solution.value(handles[(t, w)]))
        steps: list[tuple[float, float]] = []
        for price in sorted(by_price):
            volumes = by_price[price]
            spread = max(volumes) - min(volumes)
            if spread > CURVE_MERGE_TOL:
                raise SolverError(
                    f"{kind} hour {t}: volumes at price {price} spread {spread:.3e}; "
                    "equal-price coupling violated"
                )
            volume = float(np.mean(volumes))
            if kind != CURVE_DAY_AHEAD:
                if volume < -CURVE_MERGE_TOL:
                    raise SolverError(
                        f"{kind} hour {t}: negative volume {volume:.3e} at price {price}"
                    )
                volume = max(volume, 0.0)
            steps.append((price, volume))
        level = steps[0][1]
        for k in range(1, len(steps)):
            gap = sign * (steps[k][1] - level)
            if gap < -CURVE_MERGE_TOL:
                raise SolverError(
                    f"{kind} hour {t}: volume order violated by {-gap:.3e} "
                    f"at price {steps[k][0]}"
                )
            if gap < 0.0:
                # solver wobble inside the tolerance: flatten onto the level
                steps[k] = (steps[k][0], level)
            level = steps[k][1]
        curves.append(BidCurve(hour=int(t), kind=kind, steps=tuple(steps)))
    return curves


def dump_curves(curves: Iterable[BidCurve]) -> str:
    """CSV text for offer curves: ``hour,kind,price,quantity`` rows."""
    lines = ["hour,kind,price,quantity"]
    for curve in curves:
        for price, volume in curve.steps:
            lines.append(f"{curve.hour},{curve.kind},{price!r},{volume!r}")
    return "\n".join(lines) + "\n"


def load_curves(text: str) -> list[BidCurve]:
    """Parse ``dump_curves`` output back into BidCurve objects."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "hour,kind,price,quantity":
        raise DataError("curve file: header must be 'hour,kind,price,quantity'")
    acc: dict[tuple[int, str], list[tuple[float, float]]] = {}
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise DataError(f"curve file line {n}: expected 4 columns, got {len(parts)}")
        try:
            hour = int(parts[0])
            price = float(parts[2])
            volume = float(parts[3])
        except ValueError as exc:
            raise DataError(f"curve file line {n}: {exc}") from exc
        acc.setdefault((hour, parts[1].strip()), []).append((price, volume))
    return [
        BidCurve(hour=hour, kind=kind, steps=tuple(steps))
        for (hour, kind), steps in acc.items()
    ]
