"""Portfolio domain model, config parsing and hourly time-series handling.

A portfolio is a set of heat/power units plus thermal storages operated by one
district-heating company. Units come in five kinds:

* ``CHP``            combined heat and power, heat coupled to power by phi
* ``HeatOnly``       fuel boiler, heat only
* ``ElectricHeat``   electric boiler / heat pump, heat coupled to consumed power
* ``StochasticHeat`` must-run heat source driven by weather (solar collectors)
* ``PowerOnlyRES``   power-only renewable generator (wind farm)

Every heat-producing unit delivers either straight to the network or into one or
more storages. Config files use an INI-like layout with a top-level ``beta``
key and one ``[unit.<id>]`` / ``[storage.<id>]`` section per asset; see
``load_portfolio`` for the exact schema.
"""

from __future__ import annotations

import configparser
import io
import logging
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

KIND_CHP = "CHP"
KIND_HEAT_ONLY = "HeatOnly"
KIND_ELECTRIC_HEAT = "ElectricHeat"
KIND_STOCHASTIC_HEAT = "StochasticHeat"
KIND_POWER_ONLY_RES = "PowerOnlyRES"

UNIT_KINDS = (
    KIND_CHP,
    KIND_HEAT_ONLY,
    KIND_ELECTRIC_HEAT,
    KIND_STOCHASTIC_HEAT,
    KIND_POWER_ONLY_RES,
)

# Heat-producing kinds; PowerOnlyRES units never appear in the heat balance.
HEAT_KINDS = (KIND_CHP, KIND_HEAT_ONLY, KIND_ELECTRIC_HEAT, KIND_STOCHASTIC_HEAT)

HOUR = timedelta(hours=1)

SERIES_LABELS = (
    "DayAheadPrice",
    "UpPrice",
    "DownPrice",
    "HeatDemand",
    "WindSpeed",
    "WindPower",
    "SolarRadiation",
    "AmbientTemp",
    "SolarHeat",
)

# Physical quantities that must never be negative; prices and temperature may be.
_NONNEGATIVE_LABELS = frozenset(
    {"HeatDemand", "WindSpeed", "WindPower", "SolarRadiation", "SolarHeat"}
)


@dataclass(frozen=True)
class Unit:
    """One production unit. Unused fields for a kind are None/empty."""

    id: str
    kind: str
    heat_cost: float = 0.0                 # operating cost per MWh heat (per MWh power bought for ElectricHeat)
    q_min: float = 0.0
    q_max: float = 0.0
    p_max: float | None = None             # power capacity, CHP only constraint-wise
    phi: float | None = None               # heat per unit power coupling factor
    dh_connected: bool = False
    storages: tuple[str, ...] = ()
    tariffs: dict[str, float] = field(default_factory=dict)  # RES generator id -> tariff cost

    def __post_init__(self) -> None:
        if self.kind not in UNIT_KINDS:
            raise ConfigError(f"unit {self.id!r}: unknown kind {self.kind!r}")

    @property
    def produces_heat(self) -> bool:
        return self.kind in HEAT_KINDS


@dataclass(frozen=True)
class Storage:
    """Thermal storage with hard level bounds and an initial fill."""

    id: str
    s_min: float
    s_max: float
    s_initial: float


@dataclass(frozen=True)
class Portfolio:
    units: dict[str, Unit]
    storages: dict[str, Storage]
    beta: float = 0.1

    def __post_init__(self) -> None:
        validate_portfolio(self)

    def units_of_kind(self, kind: str) -> list[Unit]:
        return [u for u in self.units.values() if u.kind == kind]

    @property
    def chp_units(self) -> list[Unit]:
        return self.units_of_kind(KIND_CHP)

    @property
    def heat_only_units(self) -> list[Unit]:
        return self.units_of_kind(KIND_HEAT_ONLY)

    @property
    def electric_heat_units(self) -> list[Unit]:
        return self.units_of_kind(KIND_ELECTRIC_HEAT)

    @property
    def stochastic_heat_units(self) -> list[Unit]:
        return self.units_of_kind(KIND_STOCHASTIC_HEAT)

    @property
    def res_generators(self) -> list[Unit]:
        return self.units_of_kind(KIND_POWER_ONLY_RES)

    @property
    def heat_units(self) -> list[Unit]:
        return [u for u in self.units.values() if u.produces_heat]


def validate_portfolio(p: Portfolio) -> None:
    """Raise ConfigError on any violated portfolio invariant."""
    if not math.isfinite(p.beta) or p.beta <= 0.0:
        raise ConfigError(f"beta must be positive and finite, got {p.beta}")
    for uid, u in p.units.items():
        if uid != u.id:
            raise ConfigError(f"unit key {uid!r} does not match id {u.id!r}")
        if u.q_min < 0 or not math.isfinite(u.q_min):
            raise ConfigError(f"unit {uid!r}: q_min must be >= 0")
        if u.produces_heat and (u.q_max < u.q_min or not math.isfinite(u.q_max)):
            raise ConfigError(f"unit {uid!r}: q_max must be finite and >= q_min")
        if u.heat_cost < 0 or not math.isfinite(u.heat_cost):
            raise ConfigError(f"unit {uid!r}: heat_cost must be >= 0")
        if u.p_max is not None and u.p_max < 0:
            raise ConfigError(f"unit {uid!r}: p_max must be >= 0")
        if u.kind in (KIND_CHP, KIND_ELECTRIC_HEAT):
            if u.phi is None or u.phi <= 0 or not math.isfinite(u.phi):
                raise ConfigError(f"unit {uid!r}: kind {u.kind} requires phi > 0")
        for sid in u.storages:
            if sid not in p.storages:
                raise ConfigError(f"unit {uid!r}: unknown storage {sid!r}")
        if u.produces_heat and not u.dh_connected and not u.storages:
            raise ConfigError(
                f"unit {uid!r} is connected neither to the network nor to a storage"
            )
        for gid, cost in u.tariffs.items():
            if u.kind != KIND_ELECTRIC_HEAT:
                raise ConfigError(f"unit {uid!r}: tariffs only allowed on ElectricHeat")
            target = p.units.get(gid)
            if target is None or target.kind != KIND_POWER_ONLY_RES:
                raise ConfigError(
                    f"unit {uid!r}: tariff partner {gid!r} is not a PowerOnlyRES unit"
                )
            if cost < 0 or not math.isfinite(cost):
                raise ConfigError(f"unit {uid!r}: tariff for {gid!r} must be >= 0")
    for sid, s in p.storages.items():
        if sid != s.id:
            raise ConfigError(f"storage key {sid!r} does not match id {s.id!r}")
        if not (0.0 <= s.s_min <= s.s_initial <= s.s_max) or not math.isfinite(s.s_max):
            raise ConfigError(
                f"storage {sid!r}: need 0 <= s_min <= s_initial <= s_max, got "
                f"({s.s_min}, {s.s_initial}, {s.s_max})"
            )


# ---------------------------------------------------------------------------
# Config file parsing
# ---------------------------------------------------------------------------

_COMMON_UNIT_KEYS = {"kind", "heat_cost", "q_min", "q_max", "dh_connected", "storages"}
_UNIT_KEYS = {
    KIND_CHP: _COMMON_UNIT_KEYS | {"p_max", "phi"},
    KIND_HEAT_ONLY: set(_COMMON_UNIT_KEYS),
    KIND_ELECTRIC_HEAT: _COMMON_UNIT_KEYS | {"phi"},  # plus tariff.<gen id> keys
    KIND_STOCHASTIC_HEAT: set(_COMMON_UNIT_KEYS),
    KIND_POWER_ONLY_RES: {"kind", "p_max"},
}
_STORAGE_KEYS = {"s_min", "s_max", "s_initial"}


def _split_preamble(text: str) -> tuple[list[str], str]:
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.lstrip().startswith("["):
            return lines[:i], "\n".join(lines[i:])
    return lines, ""


def _parse_float(raw: str, where: str) -> float:
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: not a number: {raw!r}") from exc
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite, got {raw!r}")
    return value


_BOOL_VALUES = {"true": True, "yes": True, "1": True,
                "false": False, "no": False, "0": False}


def _parse_bool(raw: str, where: str) -> bool:
    try:
        return _BOOL_VALUES[raw.strip().lower()]
    except KeyError as exc:
        raise ConfigError(f"{where}: not a boolean: {raw!r}") from exc


def load_portfolio(text: str) -> Portfolio:
    """Parse a portfolio config.

    Schema (all keys shown; unknown keys or sections are rejected)::

        beta = 0.1                      # imbalance penalty factor, required > 0

        [unit.<id>]
        kind = CHP | HeatOnly | ElectricHeat | StochasticHeat | PowerOnlyRES
        heat_cost = <float>             # all heat kinds
        q_min = <float>                 # optional, default 0
        q_max = <float>                 # required for heat kinds
        p_max = <float>                 # CHP and PowerOnlyRES, optional
        phi = <float>                   # CHP and ElectricHeat, required
        dh_connected = true|false       # optional, default false
        storages = ST1, ST2             # optional comma list of storage ids
        tariff.<gen id> = <float>       # ElectricHeat only, one per paired RES unit

        [storage.<id>]
        s_min = <float>
        s_max = <float>
        s_initial = <float>

    ``[solar.<unit id>]`` sections are reserved for the simulation harness
    (collector model coefficients) and are skipped here; see
    ``load_solar_sections``.
    """
    preamble, body = _split_preamble(text)
    beta = None
    for n, line in enumerate(preamble, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {n}: expected key = value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key != "beta":
            raise ConfigError(f"line {n}: unknown top-level key {key!r}")
        beta = _parse_float(raw.strip(), "beta")
    if beta is None:
        raise ConfigError("missing required top-level key 'beta'")

    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str  # keep key case, tariff partners are ids
    try:
        cp.read_string(body)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    units: dict[str, Unit] = {}
    storages: dict[str, Storage] = {}
    for section in cp.sections():
        if section.startswith("solar."):
            continue  # harness extension, parsed separately
        if section.startswith("unit."):
            uid = section[len("unit."):]
            if not uid:
                raise ConfigError("empty unit id in section header")
            if uid in units:
                raise ConfigError(f"duplicate unit id {uid!r}")
            units[uid] = _parse_unit(uid, dict(cp.items(section)))
        elif section.startswith("storage."):
            sid = section[len("storage."):]
            if not sid:
                raise ConfigError("empty storage id in section header")
            if sid in storages:
                raise ConfigError(f"duplicate storage id {sid!r}")
            storages[sid] = _parse_storage(sid, dict(cp.items(section)))
        else:
            raise ConfigError(f"unknown section [{section}]")

    return Portfolio(units=units, storages=storages, beta=beta)


def _parse_unit(uid: str, raw: dict[str, str]) -> Unit:
    where = f"[unit.{uid}]"
    kind = raw.pop("kind", None)
    if kind is None:
        raise ConfigError(f"{where}: missing key 'kind'")
    if kind not in UNIT_KINDS:
        raise ConfigError(f"{where}: unknown kind {kind!r}")

    tariffs: dict[str, float] = {}
    for key in [k for k in raw if k.startswith("tariff.")]:
        if kind != KIND_ELECTRIC_HEAT:
            raise ConfigError(f"{where}: key {key!r} only allowed for ElectricHeat")
        gid = key[len("tariff."):]
        tariffs[gid] = _parse_float(raw.pop(key), f"{where} {key}")

    allowed = _UNIT_KEYS[kind]
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"{where}: key {key!r} not allowed for kind {kind}")

    def fnum(key: str, default: float | None = None) -> float | None:
        if key not in raw:
            return default
        return _parse_float(raw[key], f"{where} {key}")

    storages: tuple[str, ...] = ()
    if "storages" in raw:
        names = [s.strip() for s in raw["storages"].split(",") if s.strip()]
        if len(set(names)) != len(names):
            raise ConfigError(f"{where}: duplicate storage in 'storages'")
        storages = tuple(names)

    if kind == KIND_POWER_ONLY_RES:
        return Unit(id=uid, kind=kind, p_max=fnum("p_max"))

    q_max = fnum("q_max")
    if q_max is None:
        raise ConfigError(f"{where}: missing key 'q_max'")
    return Unit(
        id=uid,
        kind=kind,
        heat_cost=fnum("heat_cost", 0.0),
        q_min=fnum("q_min", 0.0),
        q_max=q_max,
        p_max=fnum("p_max"),
        phi=fnum("phi"),
        dh_connected=_parse_bool(raw["dh_connected"], f"{where} dh_connected")
        if "dh_connected" in raw
        else False,
        storages=storages,
        tariffs=tariffs,
    )


def _parse_storage(sid: str, raw: dict[str, str]) -> Storage:
    where = f"[storage.{sid}]"
    for key in raw:
        if key not in _STORAGE_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
    for key in ("s_min", "s_max", "s_initial"):
        if key not in raw:
            raise ConfigError(f"{where}: missing key {key!r}")
    return Storage(
        id=sid,
        s_min=_parse_float(raw["s_min"], f"{where} s_min"),
        s_max=_parse_float(raw["s_max"], f"{where} s_max"),
        s_initial=_parse_float(raw["s_initial"], f"{where} s_initial"),
    )


def load_solar_sections(text: str) -> dict[str, dict[str, float]]:
    """Collector coefficients from ``[solar.<unit id>]`` sections, if any."""
    _, body = _split_preamble(text)
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        cp.read_string(body)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc
    out: dict[str, dict[str, float]] = {}
    for section in cp.sections():
        if not section.startswith("solar."):
            continue
        uid = section[len("solar."):]
        out[uid] = {
            key: _parse_float(val, f"[{section}] {key}")
            for key, val in cp.items(section)
        }
    return out


def serialize_portfolio(p: Portfolio) -> str:
    """Config text that parses back to an equal Portfolio."""
    buf = io.StringIO()
    buf.write(f"beta = {p.beta!r}\n")
    for uid in sorted(p.units):
        u = p.units[uid]
        buf.write(f"\n[unit.{uid}]\nkind = {u.kind}\n")
        if u.kind == KIND_POWER_ONLY_RES:
            if u.p_max is not None:
                buf.write(f"p_max = {u.p_max!r}\n")
            continue
        buf.write(f"heat_cost = {u.heat_cost!r}\n")
        buf.write(f"q_min = {u.q_min!r}\n")
        buf.write(f"q_max = {u.q_max!r}\n")
        if u.p_max is not None:
            buf.write(f"p_max = {u.p_max!r}\n")
        if u.phi is not None:
            buf.write(f"phi = {u.phi!r}\n")
        buf.write(f"dh_connected = {'true' if u.dh_connected else 'false'}\n")
        if u.storages:
            buf.write(f"storages = {', '.join(u.storages)}\n")
        for gid in sorted(u.tariffs):
            buf.write(f"tariff.{gid} = {u.tariffs[gid]!r}\n")
    for sid in sorted(p.storages):
        s = p.storages[sid]
        buf.write(
            f"\n[storage.{sid}]\ns_min = {s.s_min!r}\ns_max = {s.s_max!r}\n"
            f"s_initial = {s.s_initial!r}\n"
        )
    return buf.getvalue()


def with_storage_levels(p: Portfolio, levels: Mapping[str, float]) -> Portfolio:
    """Copy of the portfolio with s_initial replaced (used for carryover)."""
    storages = dict(p.storages)
    for sid, level in levels.items():
        if sid not in storages:
            raise DataError(f"unknown storage {sid!r}")
        storages[sid] = replace(storages[sid], s_initial=float(level))
    return Portfolio(units=p.units, storages=storages, beta=p.beta)


# ---------------------------------------------------------------------------
# Time series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeSeries:
    """Hourly series with a timezone-naive start stamp and float values."""

    label: str
    start: datetime
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.label not in SERIES_LABELS:
            raise DataError(f"unknown series label {self.label!r}")
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise DataError(f"{self.label}: series must be a non-empty 1-d array")
        if not np.all(np.isfinite(values)):
            raise DataError(f"{self.label}: series contains non-finite values")
        if self.label in _NONNEGATIVE_LABELS and np.any(values < 0):
            raise DataError(f"{self.label}: series must be non-negative")
        if self.start.tzinfo is not None:
            raise DataError(f"{self.label}: timestamps must be timezone-naive")
        if (self.start.minute, self.start.second, self.start.microsecond) != (0, 0, 0):
            raise DataError(f"{self.label}: start must be on the hour")

    @property
    def end(self) -> datetime:
        """First hour after the series."""
        return self.start + HOUR * len(self.values)

    def index_of(self, when: datetime) -> int:
        offset = (when - self.start) / HOUR
        idx = int(offset)
        if offset != idx or not 0 <= idx < len(self.values):
            raise DataError(
                f"{self.label}: {when.isoformat()} outside coverage "
                f"[{self.start.isoformat()}, {self.end.isoformat()})"
            )
        return idx

    def slice(self, start: datetime, hours: int) -> np.ndarray:
        i = self.index_of(start)
        if i + hours > len(self.values):
            raise DataError(
                f"{self.label}: window of {hours}h from {start.isoformat()} runs past "
                f"coverage end {self.end.isoformat()}"
            )
        return self.values[i : i + hours]


def load_timeseries(text: str, label: str) -> TimeSeries:
    """Parse ``timestamp,value`` CSV text into an hourly TimeSeries.

    Timestamps are ISO-8601, timezone-naive, and must advance in strict one-hour
    steps; days with skipped or repeated hours (DST-style 23/25-row days) are
    therefore rejected with the offending line number.
    """
    lines = text.splitlines()
    if not lines:
        raise DataError(f"{label}: empty file")
    header = [c.strip() for c in lines[0].split(",")]
    if header != ["timestamp", "value"]:
        raise DataError(f"{label}: line 1: header must be 'timestamp,value'")
    stamps: list[datetime] = []
    values: list[float] = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataError(f"{label}: line {n}: expected 2 columns, got {len(parts)}")
        raw_ts, raw_val = parts[0].strip(), parts[1].strip()
        try:
            ts = datetime.fromisoformat(raw_ts)
        except ValueError as exc:
            raise DataError(f"{label}: line {n}: bad timestamp {raw_ts!r}") from exc
        if ts.tzinfo is not None:
            raise DataError(
                f"{label}: line {n}: timezone-aware timestamp {raw_ts!r} not allowed"
            )
        try:
            val = float(raw_val)
        except ValueError as exc:
            raise DataError(f"{label}: line {n}: bad value {raw_val!r}") from exc
        if stamps and ts - stamps[-1] != HOUR:
            raise DataError(
                f"{label}: line {n}: timestamp {raw_ts!r} not one hour after "
                f"{stamps[-1].isoformat()} (gaps and repeats are rejected)"
            )
        stamps.append(ts)
        values.append(val)
    if not stamps:
        raise DataError(f"{label}: no data rows")
    return TimeSeries(label=label, start=stamps[0], values=np.array(values))


def dump_timeseries(series: TimeSeries) -> str:
    out = ["timestamp,value"]
    for i, v in enumerate(series.values):
        out.append(f"{(series.start + i * HOUR).isoformat()},{float(v)!r}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class HorizonData:
    """Aligned per-label value arrays for one planning window."""

    start: datetime
    hours: int
    values: dict[str, np.ndarray]

    def get(self, label: str) -> np.ndarray:
        try:
            return self.values[label]
        except KeyError as exc:
            raise DataError(f"no {label!r} series in horizon data") from exc


def align_horizon(
    series: Iterable[TimeSeries] | Mapping[str, TimeSeries],
    start: datetime,
    hours: int,
) -> HorizonData:
    """Slice every series to [start, start+hours); error on any coverage gap."""
    if isinstance(series, Mapping):
        items = list(series.values())
    else:
        items = list(series)
    if hours <= 0:
        raise DataError("horizon must cover at least one hour")
    values: dict[str, np.ndarray] = {}
    for ts in items:
        if ts.label in values:
            raise DataError(f"duplicate series for label {ts.label!r}")
        values[ts.label] = ts.slice(start, hours)
    return HorizonData(start=start, hours=hours, values=values)
