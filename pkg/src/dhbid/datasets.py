"""Bundled synthetic dataset: 45 days of hourly market and weather series.

All series come from small, documented seeded processes so replays and tests
run without any proprietary market data. Every stochastic ingredient draws
from its own Philox stream (see :mod:`dhbid.rng`), so the bundle is
bit-reproducible for a given ``seed`` and independent of generation order.

Processes (hour index t, hour-of-day h):

* ambient temp    5 - 4 cos(2 pi (h-15)/24) + slow AR(1) drift
* solar radiation daylight sine-bell squared times an AR(1) cloud factor
* wind speed      hidden truth: 8.5 + AR(1); the published series adds
                  reporting noise (it plays the role of the speed forecast)
* wind power      logistic power curve of the hidden truth plus sensor noise
* day-ahead price morning/evening seasonality + AR(1) + rare upward spikes,
                  floored at 30
* up/down prices  alternating regulation events on one timeline (exponential
                  gaps and durations, one direction at a time); event hours
                  move the active side by a duration-dependent percentage of
                  the day-ahead price, all other hours sit on it
* heat demand     daily shape + temperature coupling + AR(1), clipped to
                  [3, 16] so the bundled portfolio can always cover it

The companion portfolio config (Hvide Sande unit table) ships as package
data; :func:`default_portfolio_text` returns it.
"""

from __future__ import annotations

import logging
from datetime import datetime
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError
from .portfolio import TimeSeries, dump_timeseries, load_timeseries
from .rng import derive_seed, stream_rng

log = logging.getLogger(__name__)

DATA_FILES = {
    "DayAheadPrice": "dayahead_price.csv",
    "UpPrice": "up_price.csv",
    "DownPrice": "down_price.csv",
    "HeatDemand": "heat_demand.csv",
    "WindSpeed": "wind_speed.csv",
    "WindPower": "wind_power.csv",
    "SolarRadiation": "solar_radiation.csv",
    "AmbientTemp": "ambient_temp.csv",
}

DEFAULT_START = datetime(2025, 3, 1)
DEFAULT_DAYS = 45
DEFAULT_SEED = 11

WIND_RATED_MW = 6.0
PRICE_FLOOR = 30.0


def _ar1(rng: np.random.Generator, n: int, rho: float, sigma: float) -> np.ndarray:
    noise = rng.normal(0.0, sigma, n)
    out = np.empty(n)
    level = 0.0
    for t in range(n):
        level = rho * level + noise[t]
        out[t] = level
    return out


def true_wind_power(speed) -> np.ndarray:
    """Hidden logistic power curve used by the generator (rated 6 MW)."""
    speed = np.asarray(speed, dtype=float)
    return WIND_RATED_MW / (1.0 + np.exp(-(speed - 9.5) / 1.8))


def synthetic_dataset(
    seed: int = DEFAULT_SEED, days: int = DEFAULT_DAYS, start: datetime = DEFAULT_START
) -> dict[str, TimeSeries]:
    """Generate the full set of hourly series, keyed by series label."""
    if days < 1:
        raise DataError("days must be at least 1")
    n = days * 24
    t = np.arange(n)
    hod = t % 24

    rng_temp = stream_rng(derive_seed(seed, "ambient"), 0)
    ambient = 5.0 - 4.0 * np.cos(2.0 * np.pi * (hod - 15.0) / 24.0)
    ambient = ambient + _ar1(rng_temp, n, 0.995, 0.25)

    rng_cloud = stream_rng(derive_seed(seed, "cloud"), 0)
    cloud = np.clip(0.72 + _ar1(rng_cloud, n, 0.9, 0.065), 0.2, 1.0)
    bell = np.maximum(0.0, np.sin(np.pi * (hod - 6.0) / 12.0))
    radiation = bell**2 * cloud

    rng_wind = stream_rng(derive_seed(seed, "wind-truth"), 0)
    speed_true = np.clip(8.5 + _ar1(rng_wind, n, 0.97, 0.9), 0.0, 30.0)
    rng_speed = stream_rng(derive_seed(seed, "wind-report"), 0)
    speed_reported = np.clip(speed_true + rng_speed.normal(0.0, 0.7, n), 0.0, None)
    rng_power = stream_rng(derive_seed(seed, "wind-sensor"), 0)
    power = np.clip(
        true_wind_power(speed_true) + rng_power.normal(0.0, 0.25, n),
        0.0,
        WIND_RATED_MW,
    )

    rng_price = stream_rng(derive_seed(seed, "price"), 0)
    season = 70.0 * np.sin(2.0 * np.pi * (hod - 10.0) / 24.0) + 35.0 * np.sin(
        4.0 * np.pi * (hod - 2.0) / 24.0
    )
    price = 320.0 + season + _ar1(rng_price, n, 0.9, 18.0)
    spikes = rng_price.random(n) < 0.02
    price = price + spikes * np.abs(rng_price.normal(150.0, 50.0, n))
    price = np.maximum(price, PRICE_FLOOR)

    up, down = _regulation_prices(price, derive_seed(seed, "regulation"))

    rng_demand = stream_rng(derive_seed(seed, "demand"), 0)
    demand = (
        8.5
        + 2.2 * np.cos(2.0 * np.pi * (hod - 3.0) / 24.0)
        + 0.25 * (8.0 - ambient)
        + _ar1(rng_demand, n, 0.9, 0.35)
    )
    demand = np.clip(demand, 3.0, 16.0)

    values = {
        "DayAheadPrice": price,
        "UpPrice": up,
        "DownPrice": down,
        "HeatDemand": demand,
        "WindSpeed": speed_reported,
        "WindPower": power,
        "SolarRadiation": radiation,
        "AmbientTemp": ambient,
    }
    return {label: TimeSeries(label, start, vals) for label, vals in values.items()}


def _regulation_prices(price: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Walk one event timeline; at most one direction is active per hour."""
    n = len(price)
    rng = stream_rng(seed, 0)
    up = price.copy()
    down = price.copy()
    t = 0.0
    while t < n:
        gap = rng.exponential(2.0)
        dur = rng.exponential(2.0)
        start = int(np.floor(t + gap + 0.5))
        end = min(n, int(np.floor(t + gap + dur + 0.5)))
        level = max(4.0, 15.0 + 3.0 * dur + rng.normal(0.0, 4.0))
        go_up = rng.random() < 0.5
        for h in range(start, end):
            dev = max(0.5, level + rng.normal(0.0, 2.5)) / 100.0
            if go_up:
                up[h] = price[h] * (1.0 + dev)
            else:
                down[h] = price[h] * (1.0 - dev)
        t = max(t + gap + dur, t + 1.0)
    return up, down


def write_dataset(series: dict[str, TimeSeries], out_dir: str | Path) -> list[Path]:
    """Write one ``timestamp,value`` CSV per series; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for label, filename in DATA_FILES.items():
        if label not in series:
            raise DataError(f"dataset is missing the {label!r} series")
        path = out / filename
        path.write_text(dump_timeseries(series[label]))
        paths.append(path)
    return paths


def load_dataset(data_dir: str | Path) -> dict[str, TimeSeries]:
    """Load every bundled series from a data directory."""
    root = Path(data_dir)
    if not root.is_dir():
        raise DataError(f"data directory {str(root)!r} does not exist")
    series = {}
    for label, filename in DATA_FILES.items():
        path = root / filename
        if not path.is_file():
            raise DataError(f"data directory lacks {filename} ({label})")
        series[label] = load_timeseries(path.read_text(), label)
    first = next(iter(series.values()))
    for ts in series.values():
        if ts.start != first.start or len(ts.values) != len(first.values):
            raise DataError(
                f"{ts.label} does not align with {first.label} "
                f"({ts.start.isoformat()}/{len(ts.values)}h vs "
                f"{first.start.isoformat()}/{len(first.values)}h)"
            )
    return series


def default_portfolio_text() -> str:
    """Config text of the bundled reference portfolio."""
    return (
        resources.files("dhbid").joinpath("data/hvide_sande.cfg").read_text()
    )
