"""Replay reporting: hourly ledger, monthly aggregation, and file output.

``emit_report`` writes the plot-ready artifacts of one replay into a
directory: ``ledger.csv`` (one row per settled hour), ``monthly.csv``
(cost, traded volumes, per-unit production, and average prices summed or
averaged per calendar month), one ``curves_<date>.csv`` per replay day with
every submitted offer curve, and ``summary.txt`` with run totals. Floats
are written with ``repr`` so identical replays produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..stochmodels import dump_curves
from .runner import YearReport
from .settlement import LedgerEntry, SettlementLedger

_COMPONENTS = (
    "heat_cost",
    "tariff_cost",
    "dayahead_revenue",
    "up_revenue",
    "down_cost",
    "imbalance_cost",
)


@dataclass(frozen=True)
class MonthlyRow:
    """One calendar month of a replay, summed from the hourly ledger."""

    month: str
    hours: int
    total_cost: float
    heat_cost: float
    tariff_cost: float
    dayahead_revenue: float
    up_revenue: float
    down_cost: float
    imbalance_cost: float
    dayahead_mwh: float
    up_mwh: float
    down_mwh: float
    imbalance_plus_mwh: float
    imbalance_minus_mwh: float
    avg_dayahead_price: float
    avg_up_price: float
    avg_down_price: float
    heat_by_unit: dict[str, float]
    power_by_unit: dict[str, float]


def _unit_columns(entries: list[LedgerEntry]) -> tuple[list[str], list[str]]:
    heat = sorted({uid for e in entries for uid in e.heat_by_unit})
    power = sorted({uid for e in entries for uid in e.power_by_unit})
    return heat, power


def aggregate_monthly(ledger: SettlementLedger) -> list[MonthlyRow]:
    """Monthly sums (averages for prices) in chronological order."""
    groups: dict[str, list[LedgerEntry]] = {}
    for e in ledger.entries:
        groups.setdefault(e.when.strftime("%Y-%m"), []).append(e)
    rows = []
    for month in sorted(groups):
        es = groups[month]
        hours = len(es)
        rows.append(
            MonthlyRow(
                month=month,
                hours=hours,
                total_cost=float(sum(e.total_cost for e in es)),
                **{
                    key: float(sum(getattr(e, key) for e in es))
                    for key in _COMPONENTS
                },
                dayahead_mwh=float(sum(e.committed for e in es)),
                up_mwh=float(sum(e.cleared_up for e in es)),
                down_mwh=float(sum(e.cleared_down for e in es)),
                imbalance_plus_mwh=float(sum(e.imbalance_plus for e in es)),
                imbalance_minus_mwh=float(sum(e.imbalance_minus for e in es)),
                avg_dayahead_price=float(
                    sum(e.dayahead_price for e in es) / hours
                ),
                avg_up_price=float(sum(e.up_price for e in es) / hours),
                avg_down_price=float(sum(e.down_price for e in es) / hours),
                heat_by_unit={
                    uid: float(sum(e.heat_by_unit.get(uid, 0.0) for e in es))
                    for uid in sorted({u for e in es for u in e.heat_by_unit})
                },
                power_by_unit={
                    uid: float(sum(e.power_by_unit.get(uid, 0.0) for e in es))
                    for uid in sorted({u for e in es for u in e.power_by_unit})
                },
            )
        )
    return rows


def ledger_csv(ledger: SettlementLedger) -> str:
    """Hourly ledger as CSV text; per-unit and per-storage columns flatten."""
    entries = ledger.entries
    heat_ids, power_ids = _unit_columns(entries)
    storage_ids = sorted({sid for e in entries for sid in e.levels})
    header = [
        "when",
        "dayahead_price",
        "up_price",
        "down_price",
        "regulation_state",
        "committed",
        "cleared_up",
        "cleared_down",
        "delivered",
        "imbalance_plus",
        "imbalance_minus",
        *_COMPONENTS,
        "total_cost",
        "heat_short",
        "heat_dump",
        *(f"level_{sid}" for sid in storage_ids),
        *(f"heat_{uid}" for uid in heat_ids),
        *(f"power_{uid}" for uid in power_ids),
    ]
    lines = [",".join(header)]
    for e in entries:
        row = [
            e.when.isoformat(),
            repr(e.dayahead_price),
            repr(e.up_price),
            repr(e.down_price),
            e.regulation_state,
            repr(e.committed),
            repr(e.cleared_up),
            repr(e.cleared_down),
            repr(e.delivered),
            repr(e.imbalance_plus),
            repr(e.imbalance_minus),
            *(repr(getattr(e, key)) for key in _COMPONENTS),
            repr(e.total_cost),
            repr(e.heat_short),
            repr(e.heat_dump),
            *(repr(e.levels.get(sid, 0.0)) for sid in storage_ids),
            *(repr(e.heat_by_unit.get(uid, 0.0)) for uid in heat_ids),
            *(repr(e.power_by_unit.get(uid, 0.0)) for uid in power_ids),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def monthly_csv(rows: list[MonthlyRow]) -> str:
    heat_ids = sorted({uid for r in rows for uid in r.heat_by_unit})
    power_ids = sorted({uid for r in rows for uid in r.power_by_unit})
    header = [
        "month",
        "hours",
        "total_cost",
        *_COMPONENTS,
        "dayahead_mwh",
        "up_mwh",
        "down_mwh",
        "imbalance_plus_mwh",
        "imbalance_minus_mwh",
        "avg_dayahead_price",
        "avg_up_price",
        "avg_down_price",
        *(f"heat_{uid}" for uid in heat_ids),
        *(f"power_{uid}" for uid in power_ids),
    ]
    lines = [",".join(header)]
    for r in rows:
        row = [
            r.month,
            str(r.hours),
            repr(r.total_cost),
            *(repr(getattr(r, key)) for key in _COMPONENTS),
            repr(r.dayahead_mwh),
            repr(r.up_mwh),
            repr(r.down_mwh),
            repr(r.imbalance_plus_mwh),
            repr(r.imbalance_minus_mwh),
            repr(r.avg_dayahead_price),
            repr(r.avg_up_price),
            repr(r.avg_down_price),
            *(repr(r.heat_by_unit.get(uid, 0.0)) for uid in heat_ids),
            *(repr(r.power_by_unit.get(uid, 0.0)) for uid in power_ids),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def summary_text(report: YearReport) -> str:
    """Run totals as ``key: value`` lines for Table-style comparisons."""
    ledger = report.ledger
    totals = ledger.component_totals()
    lines = [
        f"preset: {report.preset}",
        f"start: {report.start.date().isoformat()}",
        f"days: {report.days}",
        f"hours: {len(ledger.entries)}",
        f"total_cost: {ledger.total_cost!r}",
    ]
    lines += [f"{key}: {totals[key]!r}" for key in _COMPONENTS]
    lines += [
        f"dayahead_mwh: {float(sum(e.committed for e in ledger.entries))!r}",
        f"up_mwh: {float(sum(e.cleared_up for e in ledger.entries))!r}",
        f"down_mwh: {float(sum(e.cleared_down for e in ledger.entries))!r}",
        f"imbalance_plus_mwh: "
        f"{float(sum(e.imbalance_plus for e in ledger.entries))!r}",
        f"imbalance_minus_mwh: "
        f"{float(sum(e.imbalance_minus for e in ledger.entries))!r}",
    ]
    for sid in sorted(report.closing_levels):
        lines.append(f"closing_{sid}: {report.closing_levels[sid]!r}")
    return "\n".join(lines) + "\n"


def emit_report(report: YearReport, out_dir: str | Path) -> list[Path]:
    """Write ledger, monthly table, per-day curves, and summary; return paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    ledger_path = out / "ledger.csv"
    ledger_path.write_text(ledger_csv(report.ledger))
    paths.append(ledger_path)
    monthly_path = out / "monthly.csv"
    monthly_path.write_text(monthly_csv(aggregate_monthly(report.ledger)))
    paths.append(monthly_path)
    for day in sorted(report.curves_by_day):
        path = out / f"curves_{day}.csv"
        path.write_text(dump_curves(report.curves_by_day[day]))
        paths.append(path)
    summary_path = out / "summary.txt"
    summary_path.write_text(summary_text(report))
    paths.append(summary_path)
    return paths
