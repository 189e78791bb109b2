"""Rolling-horizon replay: fit, bid, clear, and settle day by day.

One replay day runs the operator's actual cycle:

1. refit the price model, wind power curve, and regulation statistics on a
   trailing window ending the night before;
2. generate the preset's scenario fan, solve the day-ahead problem over a
   multi-day horizon, and extract the 24 committed-hour bid curves;
3. clear those curves against the realized day-ahead prices;
4. for each delivery hour, solve the balancing problem over the remaining
   lookahead (realized renewables at the current hour, scenarios beyond),
   clear the hour-0 regulation offers against the realized regulation
   prices, and settle the hour with :func:`~dhbid.simharness.settlement.resolve_actuals`.

Settled storage levels carry from hour to hour and across midnight into the
next day's solve. Bids for day d are due before day d-1 ends, so using day
d-1's settled closing level stands in for the operator's projected level;
it keeps the replay sequential and is the documented approximation of the
harness. Beyond the current day the lookahead uses the morning point
forecast for prices and zero commitments (the next auction has not run
yet).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from typing import Mapping

import numpy as np

from ..errors import ConfigError, DataError, DhbidError, SolverError
from ..forecast import (
    PowerCurveModel,
    PriceModel,
    SolarCollectorModel,
    evaluate_power_curve,
    evaluate_solar_collector,
    fit_power_curve,
    fit_price_model,
    predict_price,
)
from ..lpcore import LpOptions, solve
from ..portfolio import Portfolio, TimeSeries, load_portfolio, load_solar_sections
from ..rng import derive_seed
from ..scengen import (
    BalancingScenarioSet,
    BalancingStats,
    JointScenarioSet,
    ScenarioSet,
    combine_balancing_prices,
    estimate_balancing_stats,
    generate_balancing_deviations,
    reduce_scenarios_pam,
    simulate_random_walk_scenarios,
)
from ..stochmodels import (
    CURVE_DOWN,
    CURVE_UP,
    BidCurve,
    build_balancing,
    build_dayahead,
    extract_bid_curves,
)
from .clearing import clear_balancing, clear_dayahead, outcome_for
from .presets import (
    PRESET_PERFECT,
    PRESET_SINGLE_BID,
    ExperimentPreset,
)
from .settlement import LedgerEntry, SettlementLedger, resolve_actuals

log = logging.getLogger(__name__)

DAY_HOURS = 24
MIN_PRICE_FIT_DAYS = 14  # the price model needs two weekly cycles


@dataclass
class RunConfig:
    """Everything a replay needs besides the data and the preset."""

    portfolio: Portfolio
    solar_models: dict[str, SolarCollectorModel] = field(default_factory=dict)
    price_scenarios: int = 6
    res_scenarios: int = 2
    balancing_scenarios: int = 8
    mother_scenarios: int = 60
    seed: int = 2025
    fit_days: int = 15
    dayahead_horizon: int = 72
    first_stage_hours: int = DAY_HOURS
    balancing_horizon: int = 12
    price_sigma: float = 12.0
    wind_sigma: float = 0.35
    solar_sigma: float = 0.15
    options: LpOptions = field(default_factory=LpOptions)

    def __post_init__(self) -> None:
        for name in (
            "price_scenarios",
            "res_scenarios",
            "balancing_scenarios",
            "mother_scenarios",
            "balancing_horizon",
        ):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.mother_scenarios < self.price_scenarios:
            raise ConfigError(
                "mother_scenarios must be at least price_scenarios "
                f"({self.mother_scenarios} < {self.price_scenarios})"
            )
        if self.fit_days < MIN_PRICE_FIT_DAYS:
            raise ConfigError(
                f"fit_days must be at least {MIN_PRICE_FIT_DAYS} "
                "(two weekly cycles for the price model)"
            )
        if self.first_stage_hours != DAY_HOURS:
            raise ConfigError("the committed bidding window is one day (24 hours)")
        if self.dayahead_horizon < DAY_HOURS:
            raise ConfigError("dayahead_horizon must cover the committed day")
        for name in ("price_sigma", "wind_sigma", "solar_sigma"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        for u in self.portfolio.stochastic_heat_units:
            if u.id not in self.solar_models:
                raise ConfigError(
                    f"stochastic heat unit {u.id!r} has no collector model; "
                    f"add a [solar.{u.id}] section to the config"
                )
        for uid in self.solar_models:
            if uid not in {u.id for u in self.portfolio.stochastic_heat_units}:
                raise ConfigError(
                    f"[solar.{uid}] does not match a StochasticHeat unit"
                )

    @classmethod
    def from_config_text(cls, text: str, **overrides) -> "RunConfig":
        """Build from one portfolio config (with its ``[solar.*]`` sections)."""
        portfolio = load_portfolio(text)
        solar = {}
        for uid, coef in load_solar_sections(text).items():
            try:
                solar[uid] = SolarCollectorModel(**coef)
            except TypeError as exc:
                raise ConfigError(f"[solar.{uid}]: {exc}") from exc
        return cls(portfolio=portfolio, solar_models=solar, **overrides)


@dataclass(frozen=True)
class DayModels:
    """Per-day fitted models plus point forecasts from the day's first hour."""

    price: PriceModel
    power_curve: PowerCurveModel
    stats: BalancingStats
    price_forecast: TimeSeries
    wind_forecast: TimeSeries
    solar_forecast: dict[str, TimeSeries]


@dataclass
class DayState:
    """Replay position: the day to run and its opening storage levels."""

    date: datetime
    levels: dict[str, float]


@dataclass
class DayResult:
    date: datetime
    entries: list[LedgerEntry]
    curves: list[BidCurve]
    committed: np.ndarray
    dayahead_objective: float
    closing_levels: dict[str, float]


@dataclass
class YearReport:
    """A finished replay: the full ledger plus every submitted curve."""

    preset: str
    start: datetime
    days: int
    ledger: SettlementLedger
    curves_by_day: dict[str, list[BidCurve]]
    opening_levels: dict[str, float]
    closing_levels: dict[str, float]

    @property
    def total_cost(self) -> float:
        return self.ledger.total_cost


def _check_day(data: Mapping[str, TimeSeries], date: datetime, fit_days: int) -> int:
    """Validate alignment/coverage; returns hours available from ``date``."""
    if (date.hour, date.minute, date.second, date.microsecond) != (0, 0, 0, 0):
        raise DataError(f"replay days start at midnight, got {date.isoformat()}")
    ref = data["DayAheadPrice"]
    for label, ts in data.items():
        if ts.start != ref.start or len(ts.values) != len(ref.values):
            raise DataError(f"series {label} does not align with DayAheadPrice")
    fit_start = date - timedelta(days=fit_days)
    if fit_start < ref.start:
        raise DataError(
            f"need {fit_days} fit days before {date.date().isoformat()}; "
            f"data starts {ref.start.isoformat()}"
        )
    avail = int((ref.end - date) / timedelta(hours=1))
    if avail < DAY_HOURS:
        raise DataError(
            f"day {date.date().isoformat()} is not fully covered by the data"
        )
    return avail


def fit_day_models(
    data: Mapping[str, TimeSeries],
    date: datetime,
    config: RunConfig,
    cache: dict[str, DayModels] | None = None,
) -> DayModels:
    """Fit the day's models on the trailing window and forecast forward.

    Fits are preset-independent, so a shared ``cache`` (keyed by the date)
    lets several presets replay the same days without refitting. The wind
    speed and weather series double as the forecasts for future hours; the
    collector model maps them to heat, which makes the solar point forecast
    exact by construction (its uncertainty is modeled in scenario space).
    """
    key = date.isoformat()
    if cache is not None and key in cache:
        return cache[key]
    avail = _check_day(data, date, config.fit_days)
    horizon = min(config.dayahead_horizon, avail)
    fit_start = date - timedelta(days=config.fit_days)
    fit_hours = config.fit_days * DAY_HOURS

    def window(label: str) -> TimeSeries:
        return TimeSeries(label, fit_start, data[label].slice(fit_start, fit_hours))

    price_model = fit_price_model(window("DayAheadPrice"))
    obs_start = date - timedelta(hours=48)
    obs = TimeSeries(
        "DayAheadPrice", obs_start, data["DayAheadPrice"].slice(obs_start, 48)
    )
    price_forecast = predict_price(price_model, obs, horizon)

    power_curve = fit_power_curve(
        data["WindSpeed"].slice(fit_start, fit_hours),
        data["WindPower"].slice(fit_start, fit_hours),
    )
    wind_forecast = TimeSeries(
        "WindPower",
        date,
        evaluate_power_curve(power_curve, data["WindSpeed"].slice(date, horizon)),
    )
    stats = estimate_balancing_stats(
        window("DayAheadPrice"), window("UpPrice"), window("DownPrice")
    )
    solar_forecast = {
        uid: TimeSeries(
            "SolarHeat",
            date,
            evaluate_solar_collector(
                model,
                data["SolarRadiation"].slice(date, horizon),
                data["AmbientTemp"].slice(date, horizon),
            ),
        )
        for uid, model in config.solar_models.items()
    }
    models = DayModels(
        price=price_model,
        power_curve=power_curve,
        stats=stats,
        price_forecast=price_forecast,
        wind_forecast=wind_forecast,
        solar_forecast=solar_forecast,
    )
    if cache is not None:
        cache[key] = models
    return models


def _masked_walks(
    point: TimeSeries,
    sigma: float,
    count: int,
    seed: int,
    upper: float | None = None,
    mask_dark: bool = False,
) -> np.ndarray:
    """Clamped random-walk rows around a point forecast.

    ``mask_dark`` zeroes hours whose point forecast is zero, so solar
    scenarios cannot invent heat at night.
    """
    sset = simulate_random_walk_scenarios(point, sigma, count, seed, 0.0, upper)
    rows = np.array(sset.trajectories)
    if mask_dark:
        rows[:, np.asarray(point.values) <= 0.0] = 0.0
    return rows


def _res_sets(
    rows_by_unit: Mapping[str, np.ndarray], horizon: int
) -> dict[str, ScenarioSet]:
    counts = {rows.shape[0] for rows in rows_by_unit.values()}
    if len(counts) > 1:
        raise DataError("renewable sources disagree on scenario count")
    n = counts.pop() if counts else 1
    probs = np.full(n, 1.0 / n)
    return {
        uid: ScenarioSet(uid, np.asarray(rows)[:, :horizon], probs)
        for uid, rows in rows_by_unit.items()
    }


def _realized_res(
    data: Mapping[str, TimeSeries],
    config: RunConfig,
    start: datetime,
    hours: int,
) -> dict[str, np.ndarray]:
    """Realized renewable trajectories: wind from data, solar via collector."""
    out: dict[str, np.ndarray] = {}
    for g in config.portfolio.res_generators:
        out[g.id] = data["WindPower"].slice(start, hours)
    for uid, model in config.solar_models.items():
        out[uid] = evaluate_solar_collector(
            model,
            data["SolarRadiation"].slice(start, hours),
            data["AmbientTemp"].slice(start, hours),
        )
    return out


def dayahead_scenarios(
    data: Mapping[str, TimeSeries],
    models: DayModels,
    date: datetime,
    preset: ExperimentPreset,
    config: RunConfig,
    horizon: int,
    price_count: int | None = None,
) -> JointScenarioSet:
    """The preset's day-ahead scenario fan over ``horizon`` hours."""
    realized = _realized_res(data, config, date, horizon)
    iso = date.date().isoformat()
    if preset.name == PRESET_PERFECT:
        price = ScenarioSet(
            "DayAheadPrice", data["DayAheadPrice"].slice(date, horizon)[None, :],
            np.ones(1),
        )
        rows = {uid: traj[None, :] for uid, traj in realized.items()}
        return JointScenarioSet(price, _res_sets(rows, horizon))
    if preset.name == PRESET_SINGLE_BID:
        price = ScenarioSet(
            "DayAheadPrice", models.price_forecast.values[None, :horizon], np.ones(1)
        )
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
        return JointScenarioSet(price, _res_sets(rows, horizon))

    m = config.price_scenarios if price_count is None else price_count
    mother = simulate_random_walk_scenarios(
        models.price_forecast,
        config.price_sigma,
        config.mother_scenarios,
        derive_seed(config.seed, "da-price", iso),
    )
    price = reduce_scenarios_pam(mother, m)
    price = ScenarioSet(
        price.label, price.trajectories[:, :horizon], price.probabilities
    )

    n = config.res_scenarios if (preset.wind_uncertain or preset.solar_uncertain) else 1
    rows: dict[str, np.ndarray] = {}
    for g in config.portfolio.res_generators:
        if preset.wind_uncertain:
            rows[g.id] = _masked_walks(
                models.wind_forecast,
                config.wind_sigma,
                n,
                derive_seed(config.seed, "da-wind", iso, g.id),
            )
        else:
            rows[g.id] = np.tile(realized[g.id], (n, 1))
    for uid, ts in models.solar_forecast.items():
        if preset.solar_uncertain:
            rows[uid] = _masked_walks(
                ts,
                config.solar_sigma,
                n,
                derive_seed(config.seed, "da-solar", iso, uid),
                mask_dark=True,
            )
        else:
            rows[uid] = np.tile(realized[uid], (n, 1))
    return JointScenarioSet(price, _res_sets(rows, horizon))


def balancing_scenarios(
    data: Mapping[str, TimeSeries],
    models: DayModels,
    date: datetime,
    hour: int,
    lam_lookahead: np.ndarray,
    preset: ExperimentPreset,
    config: RunConfig,
) -> BalancingScenarioSet:
    """Scenario fan for the balancing solve at ``hour`` of the day.

    Hour 0 renewables are realized (the operator sees the current weather),
    later hours follow the preset; regulation-price rows come from the
    fitted event statistics around the known/forecast day-ahead prices.
    """
    when = date + timedelta(hours=hour)
    horizon = len(lam_lookahead)
    realized = _realized_res(data, config, when, horizon)
    iso = date.date().isoformat()
    if preset.name == PRESET_PERFECT:
        up = ScenarioSet(
            "UpPrice", data["UpPrice"].slice(when, horizon)[None, :], np.ones(1)
        )
        down = ScenarioSet(
            "DownPrice", data["DownPrice"].slice(when, horizon)[None, :], np.ones(1)
        )
        rows = {uid: traj[None, :] for uid, traj in realized.items()}
        return BalancingScenarioSet(up, down, _res_sets(rows, horizon))

    # The event sampler keeps its first column at zero deviation (an event
    # opens strictly after the walk starts), so column 0 stands for the
    # already-observed instant.  Sample one extra column and drop it so the
    # delivery hour itself can carry regulation in the scenario fan.
    m = config.balancing_scenarios
    up_dev = generate_balancing_deviations(
        models.stats, horizon + 1, m,
        derive_seed(config.seed, "bal-up", iso, hour), "up",
    )[:, 1:]
    down_dev = generate_balancing_deviations(
        models.stats, horizon + 1, m,
        derive_seed(config.seed, "bal-down", iso, hour), "down",
    )[:, 1:]
    up, down = combine_balancing_prices(up_dev, down_dev, lam_lookahead)

    n = config.res_scenarios if (preset.wind_uncertain or preset.solar_uncertain) else 1
    rows: dict[str, np.ndarray] = {}
    for g in config.portfolio.res_generators:
        if preset.wind_uncertain:
            point = TimeSeries(
                "WindPower", when, models.wind_forecast.slice(when, horizon)
            )
            walks = _masked_walks(
                point,
                config.wind_sigma,
                n,
                derive_seed(config.seed, "bal-wind", iso, hour, g.id),
            )
            walks[:, 0] = realized[g.id][0]
            rows[g.id] = walks
        else:
            rows[g.id] = np.tile(realized[g.id], (n, 1))
    for uid, ts in models.solar_forecast.items():
        if preset.solar_uncertain:
            point = TimeSeries("SolarHeat", when, ts.slice(when, horizon))
            walks = _masked_walks(
                point,
                config.solar_sigma,
                n,
                derive_seed(config.seed, "bal-solar", iso, hour, uid),
                mask_dark=True,
            )
            walks[:, 0] = realized[uid][0]
            rows[uid] = walks
        else:
            rows[uid] = np.tile(realized[uid], (n, 1))
    return BalancingScenarioSet(up, down, _res_sets(rows, horizon))


def _lookahead_prices(
    data: Mapping[str, TimeSeries],
    models: DayModels,
    date: datetime,
    hour: int,
    horizon: int,
    committed: np.ndarray,
    preset: ExperimentPreset,
) -> tuple[np.ndarray, np.ndarray]:
    """(day-ahead prices, commitments) over the lookahead from ``hour``.

    Hours of the current day are realized/cleared; hours past midnight carry
    no commitments yet and use the morning point forecast, except under
    perfect information where next-day prices are realized too (the realized
    regulation rows must ride on the same day-ahead prices).
    """
    lam = np.empty(horizon)
    com = np.zeros(horizon)
    day_prices = data["DayAheadPrice"].slice(date, DAY_HOURS)
    if preset.name == PRESET_PERFECT:
        tail = data["DayAheadPrice"].slice(date, hour + horizon)
    for k in range(horizon):
        h = hour + k
        if h < DAY_HOURS:
            lam[k] = day_prices[h]
            com[k] = committed[h]
        elif preset.name == PRESET_PERFECT:
            lam[k] = tail[h]
        else:
            lam[k] = models.price_forecast.values[h]
    return lam, com


def run_day(
    state: DayState,
    data: Mapping[str, TimeSeries],
    preset: ExperimentPreset,
    config: RunConfig,
    model_cache: dict[str, DayModels] | None = None,
) -> DayResult:
    """Replay one day under the preset; see the module docstring for the cycle."""
    if preset.levels or preset.steps:
        raise ConfigError(
            f"preset {preset} is a sweep; run it through the experiment helpers"
        )
    date = state.date
    try:
        avail = _check_day(data, date, config.fit_days)
        models = fit_day_models(data, date, config, model_cache)
    except DhbidError as exc:
        raise type(exc)(f"{date.date().isoformat()}: {exc}") from exc
    horizon = min(config.dayahead_horizon, avail)
    portfolio = config.portfolio

    try:
        jset = dayahead_scenarios(data, models, date, preset, config, horizon)
        demand = data["HeatDemand"].slice(date, horizon)
        problem, idx = build_dayahead(
            portfolio,
            jset,
            demand,
            storage_init=state.levels,
            horizon=horizon,
            first_stage_hours=config.first_stage_hours,
            name=f"dayahead_{date.date().isoformat()}",
        )
        sol = solve(problem, config.options)
        if not sol.is_optimal:
            raise SolverError(f"day-ahead solve ended {sol.status}")
        da_curves = extract_bid_curves(
            sol, idx, jset, range(config.first_stage_hours)
        )
        dayahead_objective = sol.objective
    except DhbidError as exc:
        raise type(exc)(f"{date.date().isoformat()} day-ahead: {exc}") from exc

    realized_lam = data["DayAheadPrice"].slice(date, DAY_HOURS)
    committed = np.array(
        [clear_dayahead(da_curves[h], realized_lam[h]) for h in range(DAY_HOURS)]
    )

    levels = dict(state.levels)
    entries: list[LedgerEntry] = []
    curves: list[BidCurve] = list(da_curves)
    up_hist = data["UpPrice"].slice(date, DAY_HOURS)
    down_hist = data["DownPrice"].slice(date, DAY_HOURS)
    for h in range(DAY_HOURS):
        when = date + timedelta(hours=h)
        try:
            outcome = outcome_for(h, realized_lam[h], up_hist[h], down_hist[h])
            lookahead = min(config.balancing_horizon, avail - h)
            lam_look, com_look = _lookahead_prices(
                data, models, date, h, lookahead, committed, preset
            )
            up_curve = down_curve = None
            if preset.uses_balancing:
                bset = balancing_scenarios(
                    data, models, date, h, lam_look, preset, config
                )
                bproblem, bidx = build_balancing(
                    portfolio,
                    com_look,
                    lam_look,
                    bset,
                    data["HeatDemand"].slice(when, lookahead),
                    storage_state=levels,
                    horizon=lookahead,
                    name=f"balancing_{when.isoformat()}",
                )
                bsol = solve(bproblem, config.options)
                if not bsol.is_optimal:
                    raise SolverError(f"balancing solve ended {bsol.status}")
                up_raw = extract_bid_curves(bsol, bidx, bset, range(1), CURVE_UP)[0]
                down_raw = extract_bid_curves(bsol, bidx, bset, range(1), CURVE_DOWN)[0]
                up_curve = BidCurve(hour=h, kind=CURVE_UP, steps=up_raw.steps)
                down_curve = BidCurve(hour=h, kind=CURVE_DOWN, steps=down_raw.steps)
                curves.extend([up_curve, down_curve])
            cleared = clear_balancing(up_curve, down_curve, outcome)
            entry = resolve_actuals(
                portfolio,
                com_look,
                cleared,
                _realized_res(data, config, when, lookahead),
                data["HeatDemand"].slice(when, lookahead),
                levels,
                outcome,
                lam_look,
                when,
                config.options,
            )
        except DhbidError as exc:
            raise type(exc)(
                f"{date.date().isoformat()} hour {h}: {exc}"
            ) from exc
        levels = dict(entry.levels)
        entries.append(entry)

    return DayResult(
        date=date,
        entries=entries,
        curves=curves,
        committed=committed,
        dayahead_objective=dayahead_objective,
        closing_levels=levels,
    )


def run_range(
    data: Mapping[str, TimeSeries],
    start: datetime,
    days: int,
    preset: ExperimentPreset,
    config: RunConfig,
    model_cache: dict[str, DayModels] | None = None,
) -> YearReport:
    """Sequential replay of ``days`` consecutive days from ``start``."""
    if days < 0:
        raise DataError("days must be non-negative")
    opening = {sid: s.s_initial for sid, s in config.portfolio.storages.items()}
    levels = dict(opening)
    ledger = SettlementLedger()
    curves_by_day: dict[str, list[BidCurve]] = {}
    for d in range(days):
        date = start + timedelta(days=d)
        result = run_day(DayState(date, levels), data, preset, config, model_cache)
        ledger.extend(result.entries)
        curves_by_day[date.date().isoformat()] = result.curves
        levels = result.closing_levels
        log.info(
            "%s %s: day cost %.2f, total %.2f",
            preset, date.date().isoformat(),
            sum(e.total_cost for e in result.entries), ledger.total_cost,
        )
    return YearReport(
        preset=str(preset),
        start=start,
        days=days,
        ledger=ledger,
        curves_by_day=curves_by_day,
        opening_levels=opening,
        closing_levels=levels,
    )


def with_tariff_level(config: RunConfig, tariff: float) -> RunConfig:
    """Config copy with every wind-to-boiler tariff replaced by ``tariff``."""
    units = dict(config.portfolio.units)
    for u in config.portfolio.electric_heat_units:
        if u.tariffs:
            units[u.id] = replace(
                u, tariffs={gid: float(tariff) for gid in u.tariffs}
            )
    portfolio = Portfolio(
        units=units, storages=dict(config.portfolio.storages), beta=config.portfolio.beta
    )
    return replace(config, portfolio=portfolio)
