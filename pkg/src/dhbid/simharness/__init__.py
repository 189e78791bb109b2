"""Market clearing, hourly settlement, rolling replays, and experiments."""

from .clearing import (
    REG_DOWN,
    REG_NONE,
    REG_STATES,
    REG_UP,
    MarketOutcome,
    clear_balancing,
    clear_dayahead,
    outcome_for,
)
from .experiments import (
    TariffPoint,
    step_count_sweep,
    tariff_sweep,
    uncertainty_ablation,
)
from .presets import (
    ABLATION_VARIANTS,
    PRESET_ABLATION,
    PRESET_NO_BALANCING,
    PRESET_PERFECT,
    PRESET_SINGLE_BID,
    PRESET_STEP_SWEEP,
    PRESET_STOCHASTIC,
    PRESET_TARIFF_SWEEP,
    ExperimentPreset,
    parse_preset,
)
from .report import (
    MonthlyRow,
    aggregate_monthly,
    emit_report,
    ledger_csv,
    monthly_csv,
    summary_text,
)
from .runner import (
    DAY_HOURS,
    DayModels,
    DayResult,
    DayState,
    RunConfig,
    YearReport,
    balancing_scenarios,
    dayahead_scenarios,
    fit_day_models,
    run_day,
    run_range,
    with_tariff_level,
)
from .settlement import LedgerEntry, SettlementLedger, resolve_actuals

__all__ = [
    "ABLATION_VARIANTS",
    "DAY_HOURS",
    "DayModels",
    "DayResult",
    "DayState",
    "ExperimentPreset",
    "LedgerEntry",
    "MarketOutcome",
    "MonthlyRow",
    "PRESET_ABLATION",
    "PRESET_NO_BALANCING",
    "PRESET_PERFECT",
    "PRESET_SINGLE_BID",
    "PRESET_STEP_SWEEP",
    "PRESET_STOCHASTIC",
    "PRESET_TARIFF_SWEEP",
    "REG_DOWN",
    "REG_NONE",
    "REG_STATES",
    "REG_UP",
    "RunConfig",
    "SettlementLedger",
    "TariffPoint",
    "YearReport",
    "aggregate_monthly",
    "balancing_scenarios",
    "clear_balancing",
    "clear_dayahead",
    "dayahead_scenarios",
    "emit_report",
    "fit_day_models",
    "ledger_csv",
    "monthly_csv",
    "outcome_for",
    "parse_preset",
    "resolve_actuals",
    "run_day",
    "run_range",
    "step_count_sweep",
    "summary_text",
    "tariff_sweep",
    "uncertainty_ablation",
    "with_tariff_level",
]
