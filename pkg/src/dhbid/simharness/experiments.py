"""Parameterized experiments: sweeps built on top of the replay runner.

The step-count sweep scores bid curves of different step counts against one
common mother scenario set, so differences come from the curve resolution
alone. The tariff sweep replays the full simulation with the wind-to-boiler
tariff raised step by step. The ablation helper compares which uncertainty
source (wind, solar, both, none) is worth modeling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Mapping

import numpy as np

from ..errors import ConfigError, SolverError
from ..lpcore import solve
from ..portfolio import TimeSeries
from ..rng import derive_seed
from ..scengen import (
    JointScenarioSet,
    ScenarioSet,
    reduce_scenarios_pam,
    simulate_random_walk_scenarios,
)
from ..stochmodels import build_dayahead, extract_bid_curves
from .clearing import clear_dayahead
from .presets import ABLATION_VARIANTS, PRESET_ABLATION, PRESET_STOCHASTIC, ExperimentPreset
from .runner import (
    DAY_HOURS,
    DayModels,
    RunConfig,
    YearReport,
    fit_day_models,
    run_range,
    with_tariff_level,
)

log = logging.getLogger(__name__)


def _point_res_rows(
    models: DayModels, config: RunConfig, horizon: int
) -> dict[str, np.ndarray]:
    rows = {
        g.id: models.wind_forecast.values[None, :horizon]
        for g in config.portfolio.res_generators
    }
    rows.update(
        {
            uid: ts.values[None, :horizon]
            for uid, ts in models.solar_forecast.items()
        }
    )
    return rows


def step_count_sweep(
    data: Mapping[str, TimeSeries],
    start: datetime,
    days: int,
    steps: tuple[int, ...],
    config: RunConfig,
    mother_count: int = 40,
    model_cache: dict[str, DayModels] | None = None,
) -> dict[int, float]:
    """In-sample expected cost of m-step day-ahead curves, per step count.

    For every day: draw one mother set of price scenarios, reduce it to each
    requested step count, solve the day-ahead problem on the reduced set,
    then score the resulting curves over the full mother set (clear the
    curve at each mother price path and re-dispatch with the bids fixed).
    Renewables stay at their point forecast so step counts are the only
    moving part; the horizon is one day so days score independently.
    """
    if not steps:
        raise ConfigError("step_count_sweep needs at least one step count")
    if max(steps) > mother_count:
        raise ConfigError(
            f"cannot reduce {mother_count} mother scenarios to {max(steps)} steps"
        )
    if min(steps) < 1:
        raise ConfigError("step counts must be positive")
    horizon = DAY_HOURS
    totals = {int(m): 0.0 for m in steps}
    for d in range(days):
        date = start + timedelta(days=d)
        models = fit_day_models(data, date, config, model_cache)
        iso = date.date().isoformat()
        point = TimeSeries(
            "DayAheadPrice", date, models.price_forecast.values[:horizon]
        )
        mother = simulate_random_walk_scenarios(
            point,
            config.price_sigma,
            mother_count,
            derive_seed(config.seed, "sweep-price", iso),
        )
        res_rows = _point_res_rows(models, config, horizon)
        res_sets = {
            uid: ScenarioSet(uid, rows, np.ones(1)) for uid, rows in res_rows.items()
        }
        demand = data["HeatDemand"].slice(date, horizon)
        for m in steps:
            reduced = reduce_scenarios_pam(mother, int(m))
            jset = JointScenarioSet(reduced, res_sets)
            problem, idx = build_dayahead(
                config.portfolio,
                jset,
                demand,
                horizon=horizon,
                first_stage_hours=horizon,
                name=f"sweep_{iso}_m{m}",
            )
            sol = solve(problem, config.options)
            if not sol.is_optimal:
                raise SolverError(f"{iso} step sweep m={m}: solve ended {sol.status}")
            curves = extract_bid_curves(sol, idx, jset, range(horizon))
            score = 0.0
            for j in range(mother.count):
                prices = mother.trajectories[j]
                bids = [
                    clear_dayahead(curves[h], float(prices[h]))
                    for h in range(horizon)
                ]
                eval_set = JointScenarioSet(
                    ScenarioSet("DayAheadPrice", prices[None, :], np.ones(1)),
                    res_sets,
                )
                eproblem, _ = build_dayahead(
                    config.portfolio,
                    eval_set,
                    demand,
                    horizon=horizon,
                    first_stage_hours=horizon,
                    fixed_bids=bids,
                    name=f"score_{iso}_m{m}_j{j}",
                )
                esol = solve(eproblem, config.options)
                if not esol.is_optimal:
                    raise SolverError(
                        f"{iso} step sweep m={m} scenario {j}: ended {esol.status}"
                    )
                score += float(mother.probabilities[j]) * esol.objective
            totals[int(m)] += score
        log.info("step sweep %s done (%d curve sizes)", iso, len(steps))
    return totals


@dataclass(frozen=True)
class TariffPoint:
    """One tariff level of the sweep with its replay outcome."""

    tariff: float
    total_cost: float
    wind_to_heat_mwh: float
    report: YearReport


def tariff_sweep(
    data: Mapping[str, TimeSeries],
    start: datetime,
    days: int,
    levels: tuple[float, ...],
    config: RunConfig,
    model_cache: dict[str, DayModels] | None = None,
) -> list[TariffPoint]:
    """Full replays with the wind-to-boiler tariff swept over ``levels``."""
    if not levels:
        raise ConfigError("tariff_sweep needs at least one tariff level")
    preset = ExperimentPreset(PRESET_STOCHASTIC)
    cache = {} if model_cache is None else model_cache
    points = []
    for level in levels:
        swept = with_tariff_level(config, float(level))
        report = run_range(data, start, days, preset, swept, cache)
        tariff_total = report.ledger.component_totals()["tariff_cost"]
        mwh = tariff_total / float(level) if level > 0 else float("nan")
        points.append(
            TariffPoint(
                tariff=float(level),
                total_cost=report.total_cost,
                wind_to_heat_mwh=mwh,
                report=report,
            )
        )
        log.info("tariff %.2f: total cost %.2f", level, report.total_cost)
    return points


def uncertainty_ablation(
    data: Mapping[str, TimeSeries],
    start: datetime,
    days: int,
    config: RunConfig,
    variants: tuple[str, ...] = ABLATION_VARIANTS,
    model_cache: dict[str, DayModels] | None = None,
) -> dict[str, YearReport]:
    """Replays with each uncertainty-source combination switched on."""
    cache = {} if model_cache is None else model_cache
    out = {}
    for variant in variants:
        preset = ExperimentPreset(PRESET_ABLATION, variant=variant)
        out[variant] = run_range(data, start, days, preset, config, cache)
    return out
