"""Point forecasts for wind power, solar heat, and day-ahead prices.

Three small models cover the stochastic inputs of a district-heating
portfolio:

* a piecewise-linear wind power curve fitted per speed bin,
* a flat-plate solar collector equation mapping radiation and ambient
  temperature to heat output,
* an ARMA price model with lags 1, 2, and 24 plus a weekly Fourier
  seasonality (period 168 hours).

All models are frozen dataclasses; fitting and prediction are pure
functions, so models can be shared across threads and serialized with
:func:`export_model` / :func:`import_model`.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import DataError
from .portfolio import TimeSeries

logger = logging.getLogger(__name__)

_EPOCH = datetime(1970, 1, 1)

# Lag structure of the price model: hours 1 and 2 capture short-range
# autocorrelation, hour 24 the daily pattern not already explained by the
# weekly Fourier terms.
PRICE_LAGS = (1, 2, 24)

WEEK_HOURS = 168.0

# Order of the long autoregression used to build residual proxies for the
# moving-average terms (Hannan-Rissanen first stage).
_LONG_AR_ORDER = 25

# Resolution of the tabulated, monotone wind power curve.
_CURVE_GRID = 513


def hours_since_epoch(when: datetime) -> int:
    """Absolute hour index of a timezone-naive, on-the-hour timestamp."""
    delta = when - _EPOCH
    hours = delta.days * 24 + delta.seconds // 3600
    if delta.seconds % 3600 or delta.microseconds:
        raise DataError(f"{when.isoformat()} is not on the hour")
    return hours


# ---------------------------------------------------------------------------
# Wind power curve
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerCurveModel:
    """Piecewise-linear wind power curve on normalized speed bins.

    ``bin_edges`` partition [0, 1] in normalized speed (raw speed divided by
    ``speed_scale``, the largest speed seen during fitting); ``slopes`` and
    ``intercepts`` hold one least-squares line per bin.  Evaluation stitches
    the lines into a single nondecreasing function clamped to
    [0, ``rated``].
    """

    bin_edges: tuple[float, ...]
    slopes: tuple[float, ...]
    intercepts: tuple[float, ...]
    speed_scale: float
    rated: float

    def __post_init__(self) -> None:
        if len(self.bin_edges) < 2:
            raise DataError("power curve needs at least one bin")
        if len(self.slopes) != len(self.bin_edges) - 1 or len(self.slopes) != len(
            self.intercepts
        ):
            raise DataError("power curve bin arrays are inconsistent")
        if not self.speed_scale > 0:
            raise DataError("power curve speed scale must be positive")
        if self.rated < 0:
            raise DataError("rated power must be non-negative")


def _pav_nondecreasing(y: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators pass: closest nondecreasing sequence."""
    vals: list[float] = []
    counts: list[int] = []
    for v in y:
        vals.append(float(v))
        counts.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v2, c2 = vals.pop(), counts.pop()
            v1, c1 = vals.pop(), counts.pop()
            vals.append((v1 * c1 + v2 * c2) / (c1 + c2))
            counts.append(c1 + c2)
    return np.repeat(vals, counts)


def _raw_curve(model: PowerCurveModel, s: np.ndarray) -> np.ndarray:
    edges = np.asarray(model.bin_edges)
    idx = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, len(model.slopes) - 1)
    return np.asarray(model.slopes)[idx] * s + np.asarray(model.intercepts)[idx]


def _tabulate_curve(model: PowerCurveModel) -> tuple[np.ndarray, np.ndarray]:
    grid = np.union1d(np.linspace(0.0, 1.0, _CURVE_GRID), model.bin_edges)
    vals = _pav_nondecreasing(_raw_curve(model, grid))
    return grid, np.clip(vals, 0.0, model.rated)


def fit_power_curve(speeds, powers, n_bins: int = 10) -> PowerCurveModel:
    """Fit per-bin least-squares lines over equal-count speed bins.

    Speeds are normalized by their maximum, which is persisted on the model
    so forecast speeds are scaled identically.  Bins with fewer than two
    observations are merged into their neighbour (with a warning).
    """
    speeds = np.asarray(speeds, dtype=float)
    powers = np.asarray(powers, dtype=float)
    if speeds.ndim != 1 or speeds.shape != powers.shape:
        raise DataError("speeds and powers must be equal-length 1-d arrays")
    if not (np.all(np.isfinite(speeds)) and np.all(np.isfinite(powers))):
        raise DataError("power curve data contains non-finite values")
    if np.any(speeds < 0) or np.any(powers < 0):
        raise DataError("speeds and powers must be non-negative")
    if n_bins < 1:
        raise DataError("n_bins must be at least 1")
    if len(speeds) < 2 * n_bins:
        raise DataError(
            f"{len(speeds)} observations cannot fill {n_bins} bins with 2 each"
        )
    scale = float(speeds.max())
    if scale <= 0 or np.ptp(speeds) == 0.0:
        raise DataError("speeds are constant; no curve can be fitted")

    s = speeds / scale
    edges = np.quantile(s, np.linspace(0.0, 1.0, n_bins + 1))
    edges[0], edges[-1] = 0.0, 1.0
    merged = np.unique(edges)
    if len(merged) < len(edges):
        logger.warning(
            "power curve: merged %d empty speed bins", len(edges) - len(merged)
        )
    edges = merged

    while True:
        counts = []
        for k in range(len(edges) - 1):
            hi = edges[k + 1]
            mask = (s >= edges[k]) & ((s <= hi) if k == len(edges) - 2 else (s < hi))
            counts.append(int(mask.sum()))
        thin = [k for k, c in enumerate(counts) if c < 2]
        if not thin or len(edges) <= 2:
            break
        # drop the interior edge next to the thinnest bin, widening it
        k = thin[0]
        drop = k + 1 if k + 1 < len(edges) - 1 else k
        edges = np.delete(edges, drop)
        logger.warning("power curve: merged a bin with <2 observations")

    slopes, intercepts = [], []
    for k in range(len(edges) - 1):
        hi = edges[k + 1]
        mask = (s >= edges[k]) & ((s <= hi) if k == len(edges) - 2 else (s < hi))
        sb, pb = s[mask], powers[mask]
        if np.ptp(sb) < 1e-12:
            slopes.append(0.0)
            intercepts.append(float(pb.mean()))
        else:
            coef = np.polyfit(sb, pb, 1)
            slopes.append(float(coef[0]))
            intercepts.append(float(coef[1]))

    return PowerCurveModel(
        bin_edges=tuple(float(e) for e in edges),
        slopes=tuple(slopes),
        intercepts=tuple(intercepts),
        speed_scale=scale,
        rated=float(powers.max()),
    )


def evaluate_power_curve(model: PowerCurveModel, speeds) -> np.ndarray:
    """Power for raw (unnormalized) speeds; array in, array out."""
    speeds = np.asarray(speeds, dtype=float)
    if np.any(speeds < 0):
        raise DataError("wind speed forecast contains negative values")
    grid, vals = _tabulate_curve(model)
    # np.interp extends flat beyond the last fitted speed, keeping the
    # output inside [0, rated]
    return np.interp(speeds / model.speed_scale, grid, vals)


def predict_wind_power(model: PowerCurveModel, speed_forecast: TimeSeries) -> TimeSeries:
    """Hourly wind power point forecast from a speed forecast."""
    power = evaluate_power_curve(model, speed_forecast.values)
    return TimeSeries("WindPower", speed_forecast.start, power)


# ---------------------------------------------------------------------------
# Solar collector
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolarCollectorModel:
    """Flat-plate collector: heat from radiation and ambient temperature.

    ``t_avg`` is the constant mean collector fluid temperature; the default
    45 degC is typical of the average of supply and return in a
    district-heating loop.
    """

    collector_area: float
    gamma: float
    eta1: float
    eta2: float
    t_avg: float = 45.0

    def __post_init__(self) -> None:
        if not self.collector_area > 0:
            raise DataError("collector area must be positive")
        for name in ("gamma", "eta1", "eta2", "t_avg"):
            if not math.isfinite(getattr(self, name)):
                raise DataError(f"collector coefficient {name} must be finite")


def evaluate_solar_collector(
    model: SolarCollectorModel, radiation, ambient
) -> np.ndarray:
    """Collector heat for radiation/ambient arrays, clamped at 0 from below."""
    radiation = np.asarray(radiation, dtype=float)
    ambient = np.asarray(ambient, dtype=float)
    if radiation.shape != ambient.shape:
        raise DataError("radiation and ambient series must have equal length")
    dt = model.t_avg - ambient
    q = model.collector_area * (
        radiation * model.gamma - model.eta1 * dt - model.eta2 * dt**2
    )
    return np.maximum(q, 0.0)


def predict_solar_heat(
    model: SolarCollectorModel, radiation: TimeSeries, ambient: TimeSeries
) -> TimeSeries:
    """Hourly solar heat point forecast from weather forecasts."""
    if radiation.start != ambient.start or len(radiation.values) != len(ambient.values):
        raise DataError("radiation and ambient series are not aligned")
    heat = evaluate_solar_collector(model, radiation.values, ambient.values)
    return TimeSeries("SolarHeat", radiation.start, heat)


# ---------------------------------------------------------------------------
# Day-ahead price model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriceModel:
    """ARMA({1,2,24}) price model with weekly Fourier seasonality.

    lambda_t = mu + sum_i phi_i lambda_{t-i} + sum_j theta_j eps_{t-j}
               + sum_k [alpha_k sin(2 pi k t / period)
                        + beta_k cos(2 pi k t / period)] + eps_t

    with i, j over :data:`PRICE_LAGS` and t the absolute hour index
    (hours since 1970-01-01), so a fitted model stays phase-aligned when
    applied to later windows.
    """

    mu: float
    phi: tuple[float, float, float]
    theta: tuple[float, float, float]
    fourier_k: int
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    residual_sigma: float
    period: float = WEEK_HOURS

    def __post_init__(self) -> None:
        if self.fourier_k < 0:
            raise DataError("fourier_k must be non-negative")
        if len(self.alpha) != self.fourier_k or len(self.beta) != self.fourier_k:
            raise DataError("alpha/beta must hold one coefficient per Fourier term")
        if self.residual_sigma < 0:
            raise DataError("residual_sigma must be non-negative")
        if not self.period > 0:
            raise DataError("period must be positive")


def fourier_regressors(k: int, period: float, t_range) -> np.ndarray:
    """Matrix of 2k seasonal columns: sin/cos pairs per harmonic.

    Column order is sin(1), cos(1), sin(2), cos(2), ...; coefficients
    alpha_k multiply the sines, beta_k the cosines.
    """
    if k < 0:
        raise DataError("k must be non-negative")
    if not period > 0:
        raise DataError("period must be positive")
    t = np.asarray(t_range, dtype=float)
    out = np.empty((len(t), 2 * k))
    for j in range(1, k + 1):
        w = 2.0 * np.pi * j / period
        out[:, 2 * j - 2] = np.sin(w * t)
        out[:, 2 * j - 1] = np.cos(w * t)
    return out


def _seasonal_values(model: PriceModel, t_abs: np.ndarray) -> np.ndarray:
    if model.fourier_k == 0:
        return np.zeros(len(t_abs))
    fr = fourier_regressors(model.fourier_k, model.period, t_abs)
    coef = np.empty(2 * model.fourier_k)
    coef[0::2] = model.alpha
    coef[1::2] = model.beta
    return fr @ coef


def _aicc(sse: float, n: int, n_coef: int) -> float:
    p = n_coef + 1  # +1 for the residual variance
    if n - p - 1 <= 0:
        return np.inf
    return n * math.log(max(sse, 1e-300) / n) + 2 * p + 2 * p * (p + 1) / (n - p - 1)


def _bic(sse: float, n: int, n_coef: int) -> float:
    return n * math.log(max(sse, 1e-300) / n) + math.log(n) * (n_coef + 1)


def fit_price_model(
    price_history: TimeSeries, k_max: int = 3, period: float = WEEK_HOURS
) -> PriceModel:
    """Two-stage least-squares fit of the price model.

    Stage one fits a long autoregression (with the seasonal columns) whose
    residuals proxy the unobserved shocks; stage two regresses the price on
    its lags, the residual lags, and the Fourier columns.  Within each
    harmonic count the set of retained ARMA terms is chosen by BIC, whose
    stiffer penalty keeps spurious near-cancelling AR/MA pairs out of the
    model when the data carry little autocorrelation; the harmonic count
    in 0..``k_max`` is then chosen by AICc.
    """
    x = np.asarray(price_history.values, dtype=float)
    n = len(x)
    if n < 2 * int(WEEK_HOURS):
        raise DataError(
            f"price history of {n}h is shorter than two weeks ({2 * int(WEEK_HOURS)}h)"
        )
    if k_max < 0:
        raise DataError("k_max must be non-negative")
    if not period > 0:
        raise DataError("period must be positive")

    if float(np.var(x)) < 1e-12:
        return PriceModel(
            mu=float(x.mean()),
            phi=(0.0, 0.0, 0.0),
            theta=(0.0, 0.0, 0.0),
            fourier_k=0,
            alpha=(),
            beta=(),
            residual_sigma=0.0,
            period=period,
        )

    t0 = hours_since_epoch(price_history.start)
    t_abs = t0 + np.arange(n)
    start = _LONG_AR_ORDER + max(PRICE_LAGS)
    rows = np.arange(start, n)
    n_eff = len(rows)
    y = x[rows]

    # subsets of the six ARMA columns, parsimonious first so AICc ties
    # resolve toward fewer terms
    masks = sorted(range(64), key=lambda m: (bin(m).count("1"), m))

    best = None
    for k in range(k_max + 1):
        fr = fourier_regressors(k, period, t_abs)
        base = np.column_stack([np.ones(n), fr])
        # harmonics at or beyond the Nyquist rate of the hourly sampling
        # alias into earlier columns; detect via the smallest singular value
        if k > 0 and np.linalg.svd(base, compute_uv=False)[-1] < 1e-8 * math.sqrt(n):
            logger.warning(
                "price model: dropping collinear Fourier terms beyond k=%d", k - 1
            )
            break

        # stage one: long AR for residual proxies
        lag_block = np.column_stack(
            [x[_LONG_AR_ORDER - j : n - j] for j in range(1, _LONG_AR_ORDER + 1)]
        )
        a1 = np.column_stack([base[_LONG_AR_ORDER:], lag_block])
        coef1, *_ = np.linalg.lstsq(a1, x[_LONG_AR_ORDER:], rcond=None)
        eps = np.zeros(n)
        eps[_LONG_AR_ORDER:] = x[_LONG_AR_ORDER:] - a1 @ coef1

        arma_cols = [x[rows - lag] for lag in PRICE_LAGS]
        arma_cols += [eps[rows - lag] for lag in PRICE_LAGS]

        pick = None
        for mask in masks:
            picked = [arma_cols[j] for j in range(6) if mask >> j & 1]
            design = np.column_stack([base[rows]] + picked)
            coef, *_ = np.linalg.lstsq(design, y, rcond=None)
            resid = y - design @ coef
            sse = float(resid @ resid)
            score = _bic(sse, n_eff, design.shape[1])
            if pick is None or score < pick[0]:
                pick = (score, mask, coef, sse, design.shape[1])

        _, mask, coef, sse, n_coef = pick
        score = (_aicc(sse, n_eff, n_coef), bin(mask).count("1"), k)
        if best is None or score < best[0]:
            best = (score, k, mask, coef, sse, n_coef)

    if best is None:
        raise DataError("no admissible price model; history too degenerate")
    _, k, mask, coef, sse, n_coef = best

    mu = float(coef[0])
    alpha = tuple(float(v) for v in coef[1 : 1 + 2 * k : 2])
    beta = tuple(float(v) for v in coef[2 : 1 + 2 * k : 2])
    arma = np.zeros(6)
    arma[[j for j in range(6) if mask >> j & 1]] = coef[1 + 2 * k :]
    dof = max(n_eff - n_coef, 1)
    return PriceModel(
        mu=mu,
        phi=tuple(float(v) for v in arma[:3]),
        theta=tuple(float(v) for v in arma[3:]),
        fourier_k=k,
        alpha=alpha,
        beta=beta,
        residual_sigma=float(np.sqrt(sse / dof)),
        period=period,
    )


def predict_price(
    model: PriceModel, last_observations: TimeSeries, horizon_hours: int
) -> TimeSeries:
    """Recursive point forecast; unobserved future shocks enter as zero.

    The observation window must supply price and shock lags up to 24 hours.
    Shocks inside the window are recovered by filtering with the model
    (seeded with zeros where the window itself lacks lags).
    """
    if horizon_hours < 1:
        raise DataError("horizon must be at least one hour")
    obs = np.asarray(last_observations.values, dtype=float)
    n = len(obs)
    if n < max(PRICE_LAGS):
        raise DataError(
            f"need at least {max(PRICE_LAGS)} observed hours for the price lags, got {n}"
        )
    t0 = hours_since_epoch(last_observations.start)
    total = n + horizon_hours
    seasonal = _seasonal_values(model, t0 + np.arange(total))

    vals = np.concatenate([obs, np.zeros(horizon_hours)])
    eps = np.zeros(total)
    max_lag = max(PRICE_LAGS)
    for t in range(max_lag, n):
        pred = model.mu + seasonal[t]
        for i, lag in enumerate(PRICE_LAGS):
            pred += model.phi[i] * vals[t - lag] + model.theta[i] * eps[t - lag]
        eps[t] = vals[t] - pred
    for t in range(n, total):
        pred = model.mu + seasonal[t]
        for i, lag in enumerate(PRICE_LAGS):
            pred += model.phi[i] * vals[t - lag] + model.theta[i] * eps[t - lag]
        vals[t] = pred
    return TimeSeries("DayAheadPrice", last_observations.end, vals[n:])


# ---------------------------------------------------------------------------
# Model serialization
# ---------------------------------------------------------------------------

_MODEL_TAGS = {
    PowerCurveModel: "power_curve",
    SolarCollectorModel: "solar_collector",
    PriceModel: "price",
}


def export_model(model) -> str:
    """JSON text for any forecast model.

    Schema: an object with a ``"model"`` tag (``power_curve``,
    ``solar_collector``, or ``price``) plus the dataclass fields; sequences
    are JSON arrays.  :func:`import_model` reverses the mapping.
    """
    tag = _MODEL_TAGS.get(type(model))
    if tag is None:
        raise DataError(f"cannot export object of type {type(model).__name__}")
    body = {"model": tag}
    for name in model.__dataclass_fields__:
        value = getattr(model, name)
        body[name] = list(value) if isinstance(value, tuple) else value
    return json.dumps(body, indent=2) + "\n"


def import_model(text: str):
    """Rebuild a forecast model exported with :func:`export_model`."""
    try:
        body = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"model text is not valid JSON: {exc}") from exc
    if not isinstance(body, dict) or "model" not in body:
        raise DataError("model text lacks the 'model' tag")
    by_tag = {tag: cls for cls, tag in _MODEL_TAGS.items()}
    cls = by_tag.get(body["model"])
    if cls is None:
        raise DataError(f"unknown model tag {body['model']!r}")
    kwargs = {}
    for name in cls.__dataclass_fields__:
        if name not in body:
            raise DataError(f"{body['model']} model text lacks field {name!r}")
        value = body[name]
        kwargs[name] = tuple(value) if isinstance(value, list) else value
    return cls(**kwargs)
