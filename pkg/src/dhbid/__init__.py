"""dhbid: portfolio planning and market bidding for district heating operators.

The package is organised bottom-up:

* ``portfolio``   asset/config model and hourly time series
* ``forecast``    wind power curve, solar collector and electricity price models
* ``scengen``     scenario simulation, k-medoids reduction, balancing deviations
* ``lpcore``      solver-agnostic LP container and simplex/HiGHS backends
* ``stochmodels`` two-stage day-ahead and balancing bidding LPs
* ``simharness``  market clearing, settlement, rolling replay and the CLI
* ``datasets``    bundled synthetic data for replays and examples
"""

from .datasets import load_dataset, synthetic_dataset, write_dataset
from .errors import ConfigError, DataError, DhbidError, SolverError
from .forecast import (
    PowerCurveModel,
    PriceModel,
    SolarCollectorModel,
    evaluate_power_curve,
    evaluate_solar_collector,
    export_model,
    fit_power_curve,
    fit_price_model,
    import_model,
    predict_price,
    predict_solar_heat,
    predict_wind_power,
)
from .lpcore import INFINITY, LpOptions, LpProblem, LpSolution, solve
from .portfolio import (
    HorizonData,
    Portfolio,
    Storage,
    TimeSeries,
    Unit,
    align_horizon,
    load_portfolio,
    load_timeseries,
    serialize_portfolio,
)
from .scengen import (
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
from .simharness import (
    ExperimentPreset,
    LedgerEntry,
    MarketOutcome,
    RunConfig,
    SettlementLedger,
    YearReport,
    aggregate_monthly,
    clear_balancing,
    clear_dayahead,
    emit_report,
    outcome_for,
    parse_preset,
    resolve_actuals,
    run_day,
    run_range,
)
from .stochmodels import (
    BidCurve,
    PenaltyPrices,
    build_balancing,
    build_dayahead,
    dump_curves,
    extract_bid_curves,
    load_curves,
    penalty_prices,
)

__all__ = [
    "BalancingScenarioSet",
    "BalancingStats",
    "BidCurve",
    "ConfigError",
    "DataError",
    "DhbidError",
    "ExperimentPreset",
    "HorizonData",
    "INFINITY",
    "JointScenarioSet",
    "LedgerEntry",
    "LpOptions",
    "LpProblem",
    "LpSolution",
    "MarketOutcome",
    "PenaltyPrices",
    "Portfolio",
    "PowerCurveModel",
    "PriceModel",
    "RunConfig",
    "ScenarioSet",
    "SettlementLedger",
    "SolarCollectorModel",
    "SolverError",
    "Storage",
    "TimeSeries",
    "Unit",
    "YearReport",
    "aggregate_monthly",
    "align_horizon",
    "build_balancing",
    "build_dayahead",
    "clear_balancing",
    "clear_dayahead",
    "combine_balancing_prices",
    "dump_curves",
    "emit_report",
    "estimate_balancing_stats",
    "evaluate_power_curve",
    "evaluate_solar_collector",
    "export_model",
    "extract_bid_curves",
    "fit_power_curve",
    "fit_price_model",
    "generate_balancing_deviations",
    "import_model",
    "load_curves",
    "load_dataset",
    "load_portfolio",
    "load_timeseries",
    "outcome_for",
    "parse_preset",
    "penalty_prices",
    "predict_price",
    "predict_solar_heat",
    "predict_wind_power",
    "reduce_scenarios_pam",
    "resolve_actuals",
    "run_day",
    "run_range",
    "serialize_portfolio",
    "simulate_random_walk_scenarios",
    "solve",
    "synthetic_dataset",
    "write_dataset",
]

__version__ = "0.1.0"
