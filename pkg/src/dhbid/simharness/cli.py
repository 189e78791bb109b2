"""Command-line front end for replays, scenario dumps, and one-shot solves.

Subcommands::

    dhbid run            replay a date range under a preset, write reports
    dhbid solve-dayahead solve one day-ahead problem, write its bid curves
    dhbid scengen        dump generated scenario matrices for inspection
    dhbid synth-data     write the bundled synthetic dataset and config

Exit codes: 0 on success, 2 for configuration/data problems, 3 for solver
failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from ..datasets import (
    DEFAULT_DAYS,
    DEFAULT_SEED,
    DEFAULT_START,
    default_portfolio_text,
    load_dataset,
    synthetic_dataset,
    write_dataset,
)
from ..errors import ConfigError, DataError, SolverError
from ..lpcore import LpOptions, solve
from ..rng import derive_seed
from ..scengen import (
    combine_balancing_prices,
    dump_scenarios,
    generate_balancing_deviations,
    reduce_scenarios_pam,
    simulate_random_walk_scenarios,
)
from ..stochmodels import build_dayahead, dump_curves, extract_bid_curves
from ..portfolio import TimeSeries
from .experiments import step_count_sweep, tariff_sweep
from .presets import (
    PRESET_STEP_SWEEP,
    PRESET_TARIFF_SWEEP,
    ExperimentPreset,
    parse_preset,
)
from .report import emit_report
from .runner import DAY_HOURS, RunConfig, dayahead_scenarios, fit_day_models, run_range

log = logging.getLogger(__name__)


def _date(text: str) -> datetime:
    try:
        when = datetime.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad date {text!r}: {exc}") from exc
    if (when.hour, when.minute, when.second, when.microsecond) != (0, 0, 0, 0):
        raise argparse.ArgumentTypeError(f"{text!r}: dates must be plain days")
    return when


def _add_setup_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="portfolio config file")
    p.add_argument("--data", required=True, help="directory of data CSV files")
    p.add_argument("--seed", type=int, default=2025, help="scenario seed")
    p.add_argument(
        "--price-scenarios", type=int, default=6, metavar="M",
        help="day-ahead curve steps after reduction",
    )
    p.add_argument(
        "--res-scenarios", type=int, default=2, metavar="N",
        help="renewable scenarios per source",
    )
    p.add_argument(
        "--balancing-scenarios", type=int, default=8, metavar="K",
        help="regulation price scenarios per balancing solve",
    )
    p.add_argument(
        "--mother-scenarios", type=int, default=60,
        help="price scenarios drawn before reduction",
    )
    p.add_argument(
        "--backend", choices=("auto", "simplex", "highs"), default="auto",
        help="LP backend",
    )


def _config_from_args(args: argparse.Namespace, **extra) -> RunConfig:
    text = Path(args.config).read_text()
    return RunConfig.from_config_text(
        text,
        price_scenarios=args.price_scenarios,
        res_scenarios=args.res_scenarios,
        balancing_scenarios=args.balancing_scenarios,
        mother_scenarios=args.mother_scenarios,
        seed=args.seed,
        options=LpOptions(backend=args.backend),
        **extra,
    )


def _cmd_run(args: argparse.Namespace) -> int:
    preset = parse_preset(args.preset)
    config = _config_from_args(args)
    data = load_dataset(args.data)
    start = args.date_from
    if args.date_to < start:
        raise DataError("--to must not precede --from")
    days = (args.date_to - start) // timedelta(days=1) + 1
    out = Path(args.out)
    cache: dict = {}

    if preset.name == PRESET_STEP_SWEEP:
        totals = step_count_sweep(data, start, days, preset.steps, config, model_cache=cache)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["steps,total_cost"]
        lines += [f"{m},{totals[m]!r}" for m in sorted(totals)]
        (out / "step_sweep.csv").write_text("\n".join(lines) + "\n")
        for m in sorted(totals):
            print(f"steps {m}: expected cost {totals[m]:.2f}")
        print(f"wrote {out / 'step_sweep.csv'}")
        return 0

    if preset.name == PRESET_TARIFF_SWEEP:
        points = tariff_sweep(data, start, days, preset.levels, config, model_cache=cache)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["tariff,total_cost,wind_to_heat_mwh"]
        for pt in points:
            lines.append(f"{pt.tariff!r},{pt.total_cost!r},{pt.wind_to_heat_mwh!r}")
            emit_report(pt.report, out / f"tariff_{pt.tariff:g}")
            print(f"tariff {pt.tariff:.2f}: total cost {pt.total_cost:.2f}")
        (out / "tariff_sweep.csv").write_text("\n".join(lines) + "\n")
        print(f"wrote {out / 'tariff_sweep.csv'}")
        return 0

    report = run_range(data, start, days, preset, config, cache)
    paths = emit_report(report, out)
    print(f"{report.preset}: {days} days from {start.date().isoformat()}")
    print(f"total cost: {report.total_cost:.2f}")
    for path in paths:
        print(f"wrote {path}")
    return 0


def _cmd_solve_dayahead(args: argparse.Namespace) -> int:
    preset = parse_preset(args.preset)
    if preset.levels or preset.steps:
        raise ConfigError(f"preset {preset} is a sweep; use 'dhbid run'")
    config = _config_from_args(args)
    data = load_dataset(args.data)
    date = args.date
    models = fit_day_models(data, date, config)
    horizon = len(models.price_forecast.values)
    jset = dayahead_scenarios(data, models, date, preset, config, horizon)
    demand = data["HeatDemand"].slice(date, horizon)
    problem, idx = build_dayahead(
        config.portfolio,
        jset,
        demand,
        horizon=horizon,
        first_stage_hours=config.first_stage_hours,
        name=f"dayahead_{date.date().isoformat()}",
    )
    sol = solve(problem, config.options)
    if not sol.is_optimal:
        raise SolverError(f"day-ahead solve ended {sol.status}")
    curves = extract_bid_curves(sol, idx, jset, range(config.first_stage_hours))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"curves_{date.date().isoformat()}.csv"
    path.write_text(dump_curves(curves))
    print(f"objective: {sol.objective!r}")
    print(f"wrote {path}")
    return 0


def _cmd_scengen(args: argparse.Namespace) -> int:
    horizon = args.horizon
    if horizon < 1:
        raise DataError("--horizon must be at least 1")
    config = _config_from_args(args, dayahead_horizon=max(horizon, DAY_HOURS))
    data = load_dataset(args.data)
    date = args.date
    models = fit_day_models(data, date, config)
    if horizon > len(models.price_forecast.values):
        raise DataError(
            f"only {len(models.price_forecast.values)} hours of data remain "
            f"from {date.date().isoformat()}"
        )
    iso = date.date().isoformat()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def write_set(name: str, sset) -> None:
        matrix, probs = dump_scenarios(sset)
        (out / f"{name}_scenarios.csv").write_text(matrix)
        (out / f"{name}_probabilities.csv").write_text(probs)
        print(f"wrote {out / f'{name}_scenarios.csv'} ({sset.count}x{sset.horizon})")

    if args.kind == "dayahead":
        point = TimeSeries("DayAheadPrice", date, models.price_forecast.values[:horizon])
        sset = simulate_random_walk_scenarios(
            point, config.price_sigma, args.count,
            derive_seed(config.seed, "da-price", iso),
        )
        if args.reduce:
            sset = reduce_scenarios_pam(sset, args.reduce)
        write_set("dayahead", sset)
    elif args.kind == "wind":
        point = TimeSeries("WindPower", date, models.wind_forecast.values[:horizon])
        write_set(
            "wind",
            simulate_random_walk_scenarios(
                point, config.wind_sigma, args.count,
                derive_seed(config.seed, "da-wind", iso), 0.0,
            ),
        )
    elif args.kind == "solar":
        if not models.solar_forecast:
            raise DataError("the portfolio has no solar units")
        for uid, ts in sorted(models.solar_forecast.items()):
            point = TimeSeries("SolarHeat", date, ts.values[:horizon])
            write_set(
                f"solar_{uid}",
                simulate_random_walk_scenarios(
                    point, config.solar_sigma, args.count,
                    derive_seed(config.seed, "da-solar", iso, uid), 0.0,
                ),
            )
    else:  # balancing
        base = models.price_forecast.values[:horizon]
        up_dev = generate_balancing_deviations(
            models.stats, horizon, args.count,
            derive_seed(config.seed, "bal-up", iso, 0), "up",
        )
        down_dev = generate_balancing_deviations(
            models.stats, horizon, args.count,
            derive_seed(config.seed, "bal-down", iso, 0), "down",
        )
        up, down = combine_balancing_prices(up_dev, down_dev, np.asarray(base))
        write_set("up", up)
        write_set("down", down)
    return 0


def _cmd_synth_data(args: argparse.Namespace) -> int:
    series = synthetic_dataset(seed=args.seed, days=args.days, start=args.start)
    paths = write_dataset(series, args.out)
    cfg_path = Path(args.out) / "portfolio.cfg"
    cfg_path.write_text(default_portfolio_text())
    paths.append(cfg_path)
    for path in paths:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dhbid",
        description="District heating portfolio bidding: replays and solves.",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a date range under a preset")
    _add_setup_options(run)
    run.add_argument("--preset", default="StochasticFull", help="experiment preset")
    run.add_argument("--from", dest="date_from", type=_date, required=True,
                     help="first replay day (YYYY-MM-DD)")
    run.add_argument("--to", dest="date_to", type=_date, required=True,
                     help="last replay day, inclusive")
    run.add_argument("--out", required=True, help="report output directory")
    run.set_defaults(func=_cmd_run)

    solve_cmd = sub.add_parser(
        "solve-dayahead", help="solve one day-ahead problem and write curves"
    )
    _add_setup_options(solve_cmd)
    solve_cmd.add_argument("--preset", default="StochasticFull")
    solve_cmd.add_argument("--date", type=_date, required=True, help="delivery day")
    solve_cmd.add_argument("--out", default=".", help="curve output directory")
    solve_cmd.set_defaults(func=_cmd_solve_dayahead)

    scen = sub.add_parser("scengen", help="write generated scenario matrices")
    scen.add_argument(
        "kind", choices=("dayahead", "balancing", "wind", "solar"),
        help="scenario family",
    )
    _add_setup_options(scen)
    scen.add_argument("--date", type=_date, required=True, help="forecast day")
    scen.add_argument("--horizon", type=int, default=DAY_HOURS, help="hours")
    scen.add_argument("--count", type=int, default=10, help="scenario count")
    scen.add_argument(
        "--reduce", type=int, default=0, metavar="K",
        help="reduce day-ahead scenarios to K medoids",
    )
    scen.add_argument("--out", default=".", help="output directory")
    scen.set_defaults(func=_cmd_scengen)

    synth = sub.add_parser(
        "synth-data", help="write the bundled synthetic dataset and config"
    )
    synth.add_argument("--out", required=True, help="target directory")
    synth.add_argument("--days", type=int, default=DEFAULT_DAYS)
    synth.add_argument("--seed", type=int, default=DEFAULT_SEED)
    synth.add_argument("--start", type=_date, default=DEFAULT_START)
    synth.set_defaults(func=_cmd_synth_data)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
