"""Tests for market clearing, settlement, presets, replay, and reporting."""

from __future__ import annotations

from datetime import datetime, timedelta

import numpy as np
import pytest

from dhbid.datasets import load_dataset, synthetic_dataset, write_dataset
from dhbid.errors import ConfigError, DataError
from dhbid.portfolio import Portfolio, Storage, Unit
from dhbid.simharness import (
    REG_DOWN,
    REG_NONE,
    REG_UP,
    DayState,
    ExperimentPreset,
    LedgerEntry,
    MarketOutcome,
    RunConfig,
    SettlementLedger,
    aggregate_monthly,
    clear_balancing,
    clear_dayahead,
    emit_report,
    ledger_csv,
    monthly_csv,
    outcome_for,
    parse_preset,
    resolve_actuals,
    run_day,
    run_range,
    summary_text,
    with_tariff_level,
)
from dhbid.simharness.cli import main as cli_main
from dhbid.stochmodels import CURVE_DAY_AHEAD, CURVE_DOWN, CURVE_UP, BidCurve

START = datetime(2025, 3, 1)
REPLAY = datetime(2025, 3, 16)


def small_config(**overrides):
    from dhbid.datasets import default_portfolio_text

    kwargs = dict(
        price_scenarios=2,
        res_scenarios=1,
        balancing_scenarios=2,
        mother_scenarios=6,
        seed=404,
    )
    kwargs.update(overrides)
    return RunConfig.from_config_text(default_portfolio_text(), **kwargs)


def wind_portfolio(beta=0.1):
    return Portfolio(
        units={"WF": Unit(id="WF", kind="PowerOnlyRES")}, storages={}, beta=beta
    )


def boiler_portfolio(heat_cost=401.30, q_max=10.0):
    return Portfolio(
        units={
            "GB": Unit(
                id="GB", kind="HeatOnly", heat_cost=heat_cost, q_max=q_max,
                dh_connected=True,
            )
        },
        storages={},
        beta=0.1,
    )


def da_curve(steps, hour=0):
    return BidCurve(hour=hour, kind=CURVE_DAY_AHEAD, steps=steps)


def none_outcome(lam=100.0, hour=0):
    return MarketOutcome(
        hour=hour, dayahead_price=lam, up_price=lam, down_price=lam,
        regulation_state=REG_NONE,
    )


# ---------------------------------------------------------------------------
# Market clearing
# ---------------------------------------------------------------------------


def test_dayahead_clearing_picks_highest_step_at_or_below_price():
    curve = da_curve([(100.0, -2.0), (200.0, 1.0), (300.0, 3.0)])
    assert clear_dayahead(curve, 250.0) == 1.0
    assert clear_dayahead(curve, 350.0) == 3.0
    assert clear_dayahead(curve, 200.0) == 1.0


def test_dayahead_clearing_below_the_curve():
    curve = da_curve([(100.0, -2.0), (200.0, 1.0)])
    # a purchase bid stays active however low the price goes
    assert clear_dayahead(curve, 50.0) == -2.0
    sell_only = da_curve([(100.0, 1.0), (200.0, 2.0)])
    assert clear_dayahead(sell_only, 50.0) == 0.0


def test_dayahead_clearing_rejects_regulation_curves():
    up = BidCurve(hour=0, kind=CURVE_UP, steps=[(300.0, 1.0)])
    with pytest.raises(DataError):
        clear_dayahead(up, 250.0)


def test_up_regulation_clears_like_a_supply_curve():
    up = BidCurve(hour=7, kind=CURVE_UP, steps=[(300.0, 1.0), (400.0, 2.0)])
    outcome = MarketOutcome(
        hour=7, dayahead_price=250.0, up_price=350.0, down_price=250.0,
        regulation_state=REG_UP,
    )
    assert clear_balancing(up, None, outcome) == (1.0, 0.0)
    high = MarketOutcome(
        hour=7, dayahead_price=250.0, up_price=450.0, down_price=250.0,
        regulation_state=REG_UP,
    )
    assert clear_balancing(up, None, high) == (2.0, 0.0)
    low = MarketOutcome(
        hour=7, dayahead_price=250.0, up_price=299.0, down_price=250.0,
        regulation_state=REG_UP,
    )
    assert clear_balancing(up, None, low) == (0.0, 0.0)


def test_down_regulation_clears_the_cheapest_step_still_asking_more():
    down = BidCurve(hour=3, kind=CURVE_DOWN, steps=[(200.0, 3.0), (250.0, 1.0)])
    outcome = MarketOutcome(
        hour=3, dayahead_price=300.0, up_price=300.0, down_price=220.0,
        regulation_state=REG_DOWN,
    )
    assert clear_balancing(None, down, outcome) == (0.0, 1.0)
    deep = MarketOutcome(
        hour=3, dayahead_price=300.0, up_price=300.0, down_price=190.0,
        regulation_state=REG_DOWN,
    )
    assert clear_balancing(None, down, deep) == (0.0, 3.0)
    shallow = MarketOutcome(
        hour=3, dayahead_price=300.0, up_price=300.0, down_price=260.0,
        regulation_state=REG_DOWN,
    )
    assert clear_balancing(None, down, shallow) == (0.0, 0.0)


def test_no_regulation_clears_nothing():
    up = BidCurve(hour=0, kind=CURVE_UP, steps=[(300.0, 1.0)])
    down = BidCurve(hour=0, kind=CURVE_DOWN, steps=[(50.0, 1.0)])
    assert clear_balancing(up, down, none_outcome()) == (0.0, 0.0)
    # missing curves are a valid "did not participate"
    active = MarketOutcome(
        hour=0, dayahead_price=100.0, up_price=150.0, down_price=100.0,
        regulation_state=REG_UP,
    )
    assert clear_balancing(None, None, active) == (0.0, 0.0)


def test_outcome_classification_and_validation():
    assert outcome_for(4, 100.0, 120.0, 100.0).regulation_state == REG_UP
    assert outcome_for(4, 100.0, 100.0, 80.0).regulation_state == REG_DOWN
    assert outcome_for(4, 100.0, 100.0, 100.0).regulation_state == REG_NONE
    with pytest.raises(DataError):
        outcome_for(4, 100.0, 120.0, 80.0)
    # a state contradicting the prices is corrupt data
    with pytest.raises(DataError):
        MarketOutcome(
            hour=1, dayahead_price=100.0, up_price=95.0, down_price=100.0,
            regulation_state=REG_UP,
        )
    with pytest.raises(DataError):
        MarketOutcome(
            hour=1, dayahead_price=100.0, up_price=100.0, down_price=108.0,
            regulation_state=REG_DOWN,
        )
    with pytest.raises(DataError):
        MarketOutcome(
            hour=1, dayahead_price=float("nan"), up_price=100.0,
            down_price=100.0, regulation_state=REG_NONE,
        )
    with pytest.raises(DataError):
        MarketOutcome(
            hour=1, dayahead_price=100.0, up_price=100.0, down_price=100.0,
            regulation_state="Sideways",
        )


# ---------------------------------------------------------------------------
# Settlement
# ---------------------------------------------------------------------------


def test_settled_boiler_hour_books_fuel_at_marginal_cost():
    entry = resolve_actuals(
        boiler_portfolio(),
        commitments=[0.0, 0.0, 0.0],
        activations=(0.0, 0.0),
        realized_res={},
        demand=[5.0, 5.0, 5.0],
        storage_state=None,
        outcome=none_outcome(lam=300.0),
        dayahead_prices=[300.0, 300.0, 300.0],
        when=datetime(2025, 3, 16, 0),
    )
    assert entry.heat_cost == pytest.approx(401.30 * 5.0, abs=1e-9)
    assert entry.total_cost == pytest.approx(2006.50, abs=1e-9)
    assert entry.delivered == 0.0
    assert entry.imbalance_cost == 0.0
    assert entry.heat_by_unit["GB"] == pytest.approx(5.0, abs=1e-9)


def test_settled_shortfall_buys_at_the_penalty_price():
    entry = resolve_actuals(
        wind_portfolio(beta=0.1),
        commitments=[2.0],
        activations=(0.0, 0.0),
        realized_res={"WF": np.array([1.0])},
        demand=[0.0],
        storage_state=None,
        outcome=none_outcome(lam=100.0),
        dayahead_prices=[100.0],
        when=datetime(2025, 3, 16, 5),
    )
    assert entry.imbalance_plus == pytest.approx(1.0, abs=1e-9)
    assert entry.imbalance_cost == pytest.approx(110.0, abs=1e-9)
    assert entry.dayahead_revenue == pytest.approx(200.0, abs=1e-9)
    assert entry.total_cost == pytest.approx(-90.0, abs=1e-9)
    assert entry.delivered == pytest.approx(1.0, abs=1e-9)


def test_settled_surplus_sells_at_the_penalty_price():
    entry = resolve_actuals(
        wind_portfolio(beta=0.1),
        commitments=[0.0],
        activations=(0.0, 0.0),
        realized_res={"WF": np.array([1.0])},
        demand=[0.0],
        storage_state=None,
        outcome=none_outcome(lam=100.0),
        dayahead_prices=[100.0],
        when=datetime(2025, 3, 16, 6),
    )
    assert entry.imbalance_minus == pytest.approx(1.0, abs=1e-9)
    assert entry.imbalance_cost == pytest.approx(-90.0, abs=1e-9)
    assert entry.total_cost == pytest.approx(-90.0, abs=1e-9)


def test_exact_delivery_has_no_imbalance():
    entry = resolve_actuals(
        wind_portfolio(),
        commitments=[1.5],
        activations=(0.0, 0.0),
        realized_res={"WF": np.array([1.5])},
        demand=[0.0],
        storage_state=None,
        outcome=none_outcome(lam=250.0),
        dayahead_prices=[250.0],
        when=datetime(2025, 3, 16, 7),
    )
    assert entry.imbalance_plus == 0.0
    assert entry.imbalance_minus == 0.0
    assert entry.total_cost == pytest.approx(-375.0, abs=1e-9)


def test_cleared_volume_without_matching_state_is_rejected():
    with pytest.raises(DataError):
        resolve_actuals(
            wind_portfolio(),
            commitments=[0.0],
            activations=(1.0, 0.0),
            realized_res={"WF": np.array([1.0])},
            demand=[0.0],
            storage_state=None,
            outcome=none_outcome(lam=100.0),
            dayahead_prices=[100.0],
            when=datetime(2025, 3, 16, 8),
        )


def test_settlement_price_vector_must_match_the_outcome():
    with pytest.raises(DataError):
        resolve_actuals(
            wind_portfolio(),
            commitments=[0.0],
            activations=(0.0, 0.0),
            realized_res={"WF": np.array([0.5])},
            demand=[0.0],
            storage_state=None,
            outcome=none_outcome(lam=100.0),
            dayahead_prices=[120.0],
            when=datetime(2025, 3, 16, 9),
        )


def test_cleared_up_regulation_is_paid_and_delivered():
    # CHP with free heat dumping into demand; up activation adds output
    pf = Portfolio(
        units={
            "CHP": Unit(
                id="CHP", kind="CHP", heat_cost=10.0, q_max=12.0, p_max=10.0,
                phi=1.2, dh_connected=True,
            )
        },
        storages={},
        beta=0.1,
    )
    outcome = MarketOutcome(
        hour=0, dayahead_price=100.0, up_price=160.0, down_price=100.0,
        regulation_state=REG_UP,
    )
    entry = resolve_actuals(
        pf,
        commitments=[2.0],
        activations=(1.0, 0.0),
        realized_res={},
        demand=[3.6],
        storage_state=None,
        outcome=outcome,
        dayahead_prices=[100.0],
        when=datetime(2025, 3, 16, 10),
    )
    assert entry.cleared_up == 1.0
    assert entry.up_revenue == pytest.approx(160.0, abs=1e-9)
    # heat 3.6 forces power 3.0, exactly the committed 2 plus the up MWh
    assert entry.delivered == pytest.approx(3.0, abs=1e-6)
    assert entry.heat_by_unit["CHP"] == pytest.approx(3.6, abs=1e-6)
    assert entry.imbalance_plus + entry.imbalance_minus == pytest.approx(0.0, abs=1e-6)


def test_total_cost_rebuilds_bit_identically_from_components():
    rng = np.random.default_rng(31)
    for _ in range(20):
        lam, traj = 50.0 + 300.0 * rng.random(), 4.0 * rng.random()
        committed = 4.0 * rng.random()
        entry = resolve_actuals(
            wind_portfolio(),
            commitments=[committed, committed],
            activations=(0.0, 0.0),
            realized_res={"WF": np.array([traj, traj])},
            demand=[0.0, 0.0],
            storage_state=None,
            outcome=none_outcome(lam=lam),
            dayahead_prices=[lam, lam],
            when=datetime(2025, 3, 16, 11),
        )
        rebuilt = (
            entry.heat_cost
            + entry.tariff_cost
            - entry.dayahead_revenue
            - entry.up_revenue
            + entry.down_cost
            + entry.imbalance_cost
        )
        assert rebuilt == entry.total_cost


def test_ledger_requires_strictly_advancing_time():
    ledger = SettlementLedger()
    entry = resolve_actuals(
        wind_portfolio(),
        commitments=[0.0],
        activations=(0.0, 0.0),
        realized_res={"WF": np.array([0.0])},
        demand=[0.0],
        storage_state=None,
        outcome=none_outcome(),
        dayahead_prices=[100.0],
        when=datetime(2025, 3, 16, 12),
    )
    ledger.append(entry)
    with pytest.raises(DataError):
        ledger.append(entry)
    assert ledger.total_cost == entry.total_cost
    totals = ledger.component_totals()
    assert set(totals) == {
        "heat_cost", "tariff_cost", "dayahead_revenue", "up_revenue",
        "down_cost", "imbalance_cost",
    }


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def test_preset_names_round_trip():
    for text in (
        "PerfectInformation",
        "StochasticFull",
        "StochasticNoBalancing",
        "SingleBidForecast",
        "ResUncertaintyAblation(wind)",
        "ResUncertaintyAblation(none)",
        "TariffSweep(49.52,150.0)",
        "StepCountSweep(2,5,10,20)",
    ):
        assert str(parse_preset(text)) == text


def test_preset_flags_follow_the_variant():
    assert parse_preset("PerfectInformation").uses_balancing
    assert not parse_preset("PerfectInformation").wind_uncertain
    assert not parse_preset("SingleBidForecast").uses_balancing
    assert not parse_preset("StochasticNoBalancing").uses_balancing
    full = parse_preset("StochasticFull")
    assert full.uses_balancing and full.wind_uncertain and full.solar_uncertain
    wind_only = parse_preset("ResUncertaintyAblation(wind)")
    assert wind_only.wind_uncertain and not wind_only.solar_uncertain
    neither = parse_preset("ResUncertaintyAblation(none)")
    assert not neither.wind_uncertain and not neither.solar_uncertain


def test_preset_parsing_errors():
    for text in (
        "Unknown",
        "ResUncertaintyAblation",
        "ResUncertaintyAblation(fog)",
        "PerfectInformation(1)",
        "TariffSweep()",
        "TariffSweep(-5)",
        "StepCountSweep(0)",
        "StepCountSweep(two)",
        "run day",
    ):
        with pytest.raises(ConfigError):
            parse_preset(text)


# ---------------------------------------------------------------------------
# Bundled synthetic dataset
# ---------------------------------------------------------------------------


def test_synthetic_dataset_is_deterministic_and_well_formed():
    a = synthetic_dataset(start=START, days=3, seed=9)
    b = synthetic_dataset(start=START, days=3, seed=9)
    c = synthetic_dataset(start=START, days=3, seed=10)
    assert set(a) == {
        "DayAheadPrice", "UpPrice", "DownPrice", "HeatDemand",
        "WindSpeed", "WindPower", "SolarRadiation", "AmbientTemp",
    }
    for label, series in a.items():
        assert series.start == START and len(series.values) == 72
        assert np.array_equal(series.values, b[label].values)
    assert not np.array_equal(a["DayAheadPrice"].values, c["DayAheadPrice"].values)
    lam = a["DayAheadPrice"].values
    up, down = a["UpPrice"].values, a["DownPrice"].values
    assert np.all(up >= lam - 1e-12) and np.all(down <= lam + 1e-12)
    # one direction per hour
    assert not np.any((up > lam + 1e-9) & (down < lam - 1e-9))
    assert np.all(a["WindPower"].values >= 0.0)
    assert np.all(a["SolarRadiation"].values >= 0.0)
    assert np.all(a["HeatDemand"].values > 0.0)


def test_dataset_round_trips_through_csv(tmp_path):
    series = synthetic_dataset(start=START, days=2, seed=5)
    write_dataset(series, tmp_path)
    back = load_dataset(tmp_path)
    for label, ts in series.items():
        assert back[label].start == ts.start
        np.testing.assert_array_equal(back[label].values, ts.values)


def test_misaligned_dataset_is_rejected(tmp_path):
    series = synthetic_dataset(start=START, days=2, seed=5)
    write_dataset(series, tmp_path)
    path = tmp_path / "up_price.csv"
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(DataError):
        load_dataset(tmp_path)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


def test_config_from_bundled_portfolio_text():
    config = small_config()
    assert set(config.portfolio.units) == {
        "CHP1", "CHP2", "GB1", "GB2", "EB", "SC", "WF",
    }
    assert set(config.solar_models) == {"SC"}
    assert config.price_scenarios == 2


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        small_config(price_scenarios=0)
    with pytest.raises(ConfigError):
        small_config(fit_days=10)
    with pytest.raises(ConfigError):
        small_config(first_stage_hours=12)
    with pytest.raises(ConfigError):
        small_config(mother_scenarios=1)
    with pytest.raises(ConfigError):
        small_config(wind_sigma=-1.0)


def test_tariff_override_rewrites_the_boiler_tariffs():
    config = small_config()
    swept = with_tariff_level(config, 123.0)
    for u in swept.portfolio.electric_heat_units:
        assert all(v == 123.0 for v in u.tariffs.values())
    # original untouched
    assert any(
        v != 123.0
        for u in config.portfolio.electric_heat_units
        for v in u.tariffs.values()
    )


# ---------------------------------------------------------------------------
# Replay integration
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def replay_data():
    return synthetic_dataset(start=START, days=18, seed=7)


@pytest.fixture(scope="module")
def replay_report(replay_data):
    config = small_config()
    return run_range(replay_data, REPLAY, 2, parse_preset("StochasticFull"), config)


def test_replay_covers_every_hour_in_order(replay_report):
    entries = replay_report.ledger.entries
    assert len(entries) == 48
    for k, entry in enumerate(entries):
        assert entry.when == REPLAY + timedelta(hours=k)


def test_replay_totals_rebuild_bit_identically(replay_report):
    for entry in replay_report.ledger.entries:
        rebuilt = (
            entry.heat_cost
            + entry.tariff_cost
            - entry.dayahead_revenue
            - entry.up_revenue
            + entry.down_cost
            + entry.imbalance_cost
        )
        assert rebuilt == entry.total_cost
    assert replay_report.total_cost == replay_report.ledger.total_cost


def test_replay_commits_what_the_curves_clear(replay_data, replay_report):
    lam = replay_data["DayAheadPrice"]
    for iso, curves in replay_report.curves_by_day.items():
        day = datetime.fromisoformat(iso)
        realized = lam.slice(day, 24)
        da = [c for c in curves if c.kind == CURVE_DAY_AHEAD]
        assert [c.hour for c in da] == list(range(24))
        for h, curve in enumerate(da):
            entry = replay_report.ledger.entries[
                (day - REPLAY).days * 24 + h
            ]
            assert entry.committed == clear_dayahead(curve, realized[h])


def test_replay_chains_storage_across_day_boundaries(replay_data, replay_report):
    config = small_config()
    first = run_day(
        DayState(REPLAY, dict(replay_report.opening_levels)),
        replay_data, parse_preset("StochasticFull"), config,
    )
    assert first.closing_levels == replay_report.ledger.entries[23].levels
    second = run_day(
        DayState(REPLAY + timedelta(days=1), dict(first.closing_levels)),
        replay_data, parse_preset("StochasticFull"), config,
    )
    chained = first.entries + second.entries
    for ours, theirs in zip(chained, replay_report.ledger.entries):
        assert ours.total_cost == theirs.total_cost
        assert ours.levels == theirs.levels


def test_replay_rejects_sweep_presets(replay_data):
    config = small_config()
    with pytest.raises(ConfigError):
        run_day(
            DayState(REPLAY, {}), replay_data,
            parse_preset("TariffSweep(49.52)"), config,
        )


def test_replay_errors_name_the_failing_day(replay_data):
    config = small_config()
    # an up-price column that never rises above day-ahead breaks the stats fit
    broken = {**replay_data, "UpPrice": replay_data["DownPrice"]}
    with pytest.raises(DataError, match="2025-03-16"):
        run_range(broken, REPLAY, 1, parse_preset("PerfectInformation"), config)


def test_perfect_information_beats_the_stochastic_replay(replay_data, replay_report):
    config = small_config()
    perfect = run_range(
        replay_data, REPLAY, 2, parse_preset("PerfectInformation"), config
    )
    assert perfect.total_cost <= replay_report.total_cost + 1e-6


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------


def test_monthly_aggregation_sums_the_ledger(replay_report):
    rows = aggregate_monthly(replay_report.ledger)
    assert [r.month for r in rows] == ["2025-03"]
    row = rows[0]
    assert row.hours == 48
    assert row.total_cost == pytest.approx(replay_report.total_cost, abs=1e-6)
    heat_total = sum(
        sum(e.heat_by_unit.values()) for e in replay_report.ledger.entries
    )
    assert sum(row.heat_by_unit.values()) == pytest.approx(heat_total, abs=1e-6)


def test_report_csv_values_round_trip_exactly(replay_report):
    text = ledger_csv(replay_report.ledger)
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    assert lines[0].startswith("when,dayahead_price,up_price,down_price")
    assert len(lines) == 49
    col = header.index("total_cost")
    for line, entry in zip(lines[1:], replay_report.ledger.entries):
        assert float(line.split(",")[col]) == entry.total_cost
    monthly = monthly_csv(aggregate_monthly(replay_report.ledger))
    assert monthly.splitlines()[0].startswith("month,hours,total_cost")
    assert "heat_GB1" in monthly.splitlines()[0]
    assert "power_WF" in monthly.splitlines()[0]


def test_summary_and_emitted_files(tmp_path, replay_report):
    text = summary_text(replay_report)
    assert "StochasticFull" in text
    assert repr(replay_report.total_cost) in text
    paths = emit_report(replay_report, tmp_path)
    names = {p.name for p in paths}
    assert {"ledger.csv", "monthly.csv", "summary.txt"} <= names
    assert "curves_2025-03-16.csv" in names
    assert "curves_2025-03-17.csv" in names
    again = emit_report(replay_report, tmp_path)
    for p, q in zip(paths, again):
        assert p.read_bytes() == q.read_bytes()


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def cli_data(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert cli_main(["synth-data", "--out", str(data), "--days", "17",
                     "--seed", "7"]) == 0
    return data


def cli_run_args(data, out, *extra):
    return [
        "run",
        "--config", str(data / "portfolio.cfg"),
        "--data", str(data),
        "--from", "2025-03-16",
        "--to", "2025-03-16",
        "--out", str(out),
        "--price-scenarios", "2",
        "--res-scenarios", "1",
        "--balancing-scenarios", "2",
        "--mother-scenarios", "6",
        *extra,
    ]


def test_cli_run_writes_the_report(cli_data, tmp_path, capsys):
    out = tmp_path / "out"
    code = cli_main(cli_run_args(cli_data, out, "--preset", "PerfectInformation"))
    assert code == 0
    for name in ("ledger.csv", "monthly.csv", "summary.txt",
                 "curves_2025-03-16.csv"):
        assert (out / name).exists()
    printed = capsys.readouterr().out
    assert "total cost" in printed
    ledger = (out / "ledger.csv").read_text().strip().splitlines()
    assert len(ledger) == 25


def test_cli_rejects_bad_arguments(cli_data, tmp_path):
    out = tmp_path / "out"
    # reversed date range
    args = cli_run_args(cli_data, out, "--preset", "PerfectInformation")
    args[args.index("--from") + 1] = "2025-03-17"
    assert cli_main(args) == 2
    # unknown preset
    assert cli_main(cli_run_args(cli_data, out, "--preset", "Nope")) == 2
    # missing data directory
    bad = cli_run_args(cli_data, out, "--preset", "PerfectInformation")
    bad[bad.index("--data") + 1] = str(tmp_path / "nowhere")
    assert cli_main(bad) == 2


def test_cli_scengen_and_solve_dayahead(cli_data, tmp_path):
    out = tmp_path / "scen"
    code = cli_main([
        "scengen", "dayahead",
        "--config", str(cli_data / "portfolio.cfg"),
        "--data", str(cli_data),
        "--date", "2025-03-16",
        "--count", "5",
        "--reduce", "2",
        "--out", str(out),
    ])
    assert code == 0
    files = sorted(p.name for p in out.iterdir())
    assert any("scenarios" in name for name in files)
    assert any("probabilities" in name for name in files)

    solve_out = tmp_path / "solve"
    code = cli_main([
        "solve-dayahead",
        "--config", str(cli_data / "portfolio.cfg"),
        "--data", str(cli_data),
        "--date", "2025-03-16",
        "--price-scenarios", "2",
        "--res-scenarios", "1",
        "--mother-scenarios", "6",
        "--out", str(solve_out),
    ])
    assert code == 0
    assert (solve_out / "curves_2025-03-16.csv").exists()
