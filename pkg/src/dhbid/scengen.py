"""Scenario simulation, reduction, and balancing-price generation.

Scenario sets are immutable matrices (one row per scenario) with attached
probabilities.  Three generators cover the stochastic inputs:

* random walks around a point forecast for prices, wind power, and solar
  heat,
* partitioning-around-medoids (PAM) reduction keeping exact member
  trajectories with summed probabilities,
* a regulation-event process for balancing prices: exponentially
  distributed gaps and durations with a duration-dependent price deviation.

All randomness flows through counter-based generators keyed by
(seed, scenario row), so rows are reproducible independently of
generation order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError
from .portfolio import TimeSeries, _NONNEGATIVE_LABELS
from .rng import derive_seed, stream_rng

logger = logging.getLogger(__name__)

_PROB_TOL = 1e-9

# regulation is considered active only when the balancing price clears this
# far from the day-ahead price, suppressing float noise in flat hours
ACTIVATION_DEAD_BAND = 0.01

PAM_MAX_SWEEPS = 100


# ---------------------------------------------------------------------------
# Scenario containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioSet:
    """Equally indexed trajectories with probabilities summing to one."""

    label: str
    trajectories: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        traj = np.asarray(self.trajectories, dtype=float)
        prob = np.asarray(self.probabilities, dtype=float)
        traj.setflags(write=False)
        prob.setflags(write=False)
        object.__setattr__(self, "trajectories", traj)
        object.__setattr__(self, "probabilities", prob)
        if traj.ndim != 2 or traj.shape[0] == 0 or traj.shape[1] == 0:
            raise DataError(f"{self.label}: trajectories must be a non-empty matrix")
        if not np.all(np.isfinite(traj)):
            raise DataError(f"{self.label}: trajectories contain non-finite values")
        if prob.ndim != 1 or len(prob) != traj.shape[0]:
            raise DataError(
                f"{self.label}: need one probability per scenario row "
                f"({len(prob)} vs {traj.shape[0]})"
            )
        if np.any(prob <= 0):
            raise DataError(f"{self.label}: probabilities must be positive")
        if abs(prob.sum() - 1.0) > _PROB_TOL:
            raise DataError(
                f"{self.label}: probabilities sum to {prob.sum():.12f}, not 1"
            )

    @property
    def count(self) -> int:
        return self.trajectories.shape[0]

    @property
    def horizon(self) -> int:
        return self.trajectories.shape[1]


@dataclass(frozen=True)
class JointScenarioSet:
    """Cross product of price scenarios with a shared-index RES block.

    Joint scenario ``w = i * n + j`` pairs price row ``i`` with row ``j`` of
    every RES source; probabilities are the products (price and RES
    uncertainty are independent by construction).
    """

    price: ScenarioSet
    res: Mapping[str, ScenarioSet]
    probabilities: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        n = None
        for name, sset in self.res.items():
            if sset.horizon != self.price.horizon:
                raise DataError(
                    f"RES set {name!r} horizon {sset.horizon} != price horizon "
                    f"{self.price.horizon}"
                )
            if n is None:
                n = sset.count
                ref_prob = sset.probabilities
            elif sset.count != n:
                raise DataError(
                    f"RES sources disagree on scenario count ({sset.count} vs {n})"
                )
            elif not np.allclose(sset.probabilities, ref_prob, atol=_PROB_TOL):
                raise DataError(
                    f"RES set {name!r} probabilities differ from the shared index"
                )
        if n is None:
            n = 1
            ref_prob = np.ones(1)
        joint = np.kron(self.price.probabilities, ref_prob)
        joint.setflags(write=False)
        object.__setattr__(self, "probabilities", joint)
        object.__setattr__(self, "res", dict(self.res))

    @property
    def m(self) -> int:
        return self.price.count

    @property
    def n(self) -> int:
        res = next(iter(self.res.values()), None)
        return 1 if res is None else res.count

    @property
    def count(self) -> int:
        return self.m * self.n

    @property
    def horizon(self) -> int:
        return self.price.horizon

    def price_row(self, w: int) -> int:
        return w // self.n

    def res_row(self, w: int) -> int:
        return w % self.n


def cross_join(price: ScenarioSet, res_sets: Mapping[str, ScenarioSet]) -> JointScenarioSet:
    """Joint set over all price x RES pairs with product probabilities."""
    return JointScenarioSet(price=price, res=res_sets)


@dataclass(frozen=True)
class BalancingScenarioSet:
    """Balancing-market scenarios: up/down prices share one index.

    Up and down regulation prices come from the same deviation draw, so
    they share scenario rows; RES scenarios multiply in like in
    :class:`JointScenarioSet` (joint ``w = i * n + j``).
    """

    up: ScenarioSet
    down: ScenarioSet
    res: Mapping[str, ScenarioSet]
    probabilities: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.up.count != self.down.count or self.up.horizon != self.down.horizon:
            raise DataError("up and down price sets must share their scenario index")
        if not np.allclose(
            self.up.probabilities, self.down.probabilities, atol=_PROB_TOL
        ):
            raise DataError("up and down price sets must share probabilities")
        n = None
        for name, sset in self.res.items():
            if sset.horizon != self.up.horizon:
                raise DataError(
                    f"RES set {name!r} horizon {sset.horizon} != price horizon "
                    f"{self.up.horizon}"
                )
            if n is None:
                n = sset.count
                ref_prob = sset.probabilities
            elif sset.count != n:
                raise DataError(
                    f"RES sources disagree on scenario count ({sset.count} vs {n})"
                )
            elif not np.allclose(sset.probabilities, ref_prob, atol=_PROB_TOL):
                raise DataError(
                    f"RES set {name!r} probabilities differ from the shared index"
                )
        if n is None:
            n = 1
            ref_prob = np.ones(1)
        joint = np.kron(self.up.probabilities, ref_prob)
        joint.setflags(write=False)
        object.__setattr__(self, "probabilities", joint)
        object.__setattr__(self, "res", dict(self.res))

    @property
    def m(self) -> int:
        return self.up.count

    @property
    def n(self) -> int:
        res = next(iter(self.res.values()), None)
        return 1 if res is None else res.count

    @property
    def count(self) -> int:
        return self.m * self.n

    @property
    def horizon(self) -> int:
        return self.up.horizon

    def price_row(self, w: int) -> int:
        return w // self.n

    def res_row(self, w: int) -> int:
        return w % self.n


# ---------------------------------------------------------------------------
# Random-walk simulation
# ---------------------------------------------------------------------------


def simulate_random_walk_scenarios(
    point_forecast: TimeSeries,
    sigma: float,
    count: int,
    seed: int,
    lower: float | None = None,
    upper: float | None = None,
) -> ScenarioSet:
    """Equiprobable random walks around a point forecast.

    Scenario ``w`` at hour ``t`` is the forecast plus the running sum of
    ``t`` white-noise steps N(0, sigma^2) drawn from a generator keyed by
    (seed, w).  Physical quantities are clamped: series that cannot be
    negative default to ``lower=0``; pass ``upper`` for capacity limits.
    """
    if sigma < 0:
        raise DataError("sigma must be non-negative")
    if count < 1:
        raise DataError("count must be at least 1")
    base = np.asarray(point_forecast.values, dtype=float)
    if lower is None and point_forecast.label in _NONNEGATIVE_LABELS:
        lower = 0.0
    rows = np.empty((count, len(base)))
    for w in range(count):
        steps = stream_rng(seed, w).normal(0.0, sigma, len(base))
        rows[w] = base + np.cumsum(steps)
    if lower is not None or upper is not None:
        rows = np.clip(rows, lower, upper)
    return ScenarioSet(
        label=point_forecast.label,
        trajectories=rows,
        probabilities=np.full(count, 1.0 / count),
    )


# ---------------------------------------------------------------------------
# PAM reduction
# ---------------------------------------------------------------------------


def pam_medoid_indices(
    matrix: np.ndarray, probabilities: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Probability-weighted PAM: (sorted medoid indices, assignment).

    Build phase seeds medoids greedily; swap phase applies the single best
    improving medoid/non-medoid exchange until none remains (or
    :data:`PAM_MAX_SWEEPS`).  Cost is the probability-weighted sum of
    Euclidean distances to the nearest medoid.  Ties resolve toward lower
    row indices, making the result deterministic.
    """
    x = np.asarray(matrix, dtype=float)
    w = np.asarray(probabilities, dtype=float)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise DataError(f"cannot pick {k} medoids from {n} scenarios")
    if k == n:
        return np.arange(n), np.arange(n)

    dist = cdist(x, x)

    # build: start from the weighted 1-medoid optimum, then add the point
    # with the largest cost reduction
    totals = w @ dist
    medoids = [int(np.argmin(totals))]
    dmin = dist[:, medoids[0]].copy()
    while len(medoids) < k:
        gains = w @ np.maximum(dmin[:, None] - dist, 0.0)
        gains[medoids] = -np.inf
        best = int(np.argmax(gains))
        medoids.append(best)
        dmin = np.minimum(dmin, dist[:, best])

    medoids = sorted(medoids)
    for _ in range(PAM_MAX_SWEEPS):
        cols = dist[:, medoids]
        order = np.argsort(cols, axis=1, kind="stable")
        nearest = order[:, 0]
        d1 = cols[np.arange(n), nearest]
        d2 = cols[np.arange(n), order[:, 1]]
        cost = float(w @ d1)

        best_swap = None
        outside = [h for h in range(n) if h not in medoids]
        for mi, m in enumerate(medoids):
            base = np.where(nearest == mi, d2, d1)
            for h in outside:
                new_cost = float(w @ np.minimum(base, dist[:, h]))
                if new_cost < cost - 1e-12 and (
                    best_swap is None or new_cost < best_swap[0] - 1e-12
                ):
                    best_swap = (new_cost, m, h)
        if best_swap is None:
            break
        _, m, h = best_swap
        medoids[medoids.index(m)] = h
        medoids = sorted(medoids)
    else:
        logger.warning("PAM swap phase hit the sweep limit without converging")

    medoid_idx = np.asarray(medoids)
    assignment = medoid_idx[np.argmin(dist[:, medoid_idx], axis=1)]
    return medoid_idx, assignment


def reduce_scenarios_pam(sset: ScenarioSet, k: int) -> ScenarioSet:
    """Reduce to k member trajectories; probabilities sum by assignment."""
    medoid_idx, assignment = pam_medoid_indices(
        sset.trajectories, sset.probabilities, k
    )
    probs = np.zeros(len(medoid_idx))
    for pos, m in enumerate(medoid_idx):
        probs[pos] = sset.probabilities[assignment == m].sum()
    return ScenarioSet(
        label=sset.label,
        trajectories=sset.trajectories[medoid_idx],
        probabilities=probs,
    )


# ---------------------------------------------------------------------------
# Balancing-market statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BalancingStats:
    """Regulation-event statistics estimated from balancing history.

    ``tau_gap_*`` and ``tau_dur_*`` are mean hours between and within
    regulation periods.  ``f_*`` tabulate the mean percent deviation from
    the day-ahead price per event duration (positive magnitudes for both
    directions); :func:`deviation_for` interpolates them linearly with flat
    extrapolation.  ``eps_sigma`` is the standard deviation of the hourly
    deviation around its duration mean.
    """

    tau_gap_up: float
    tau_dur_up: float
    tau_gap_down: float
    tau_dur_down: float
    f_up_durations: tuple[float, ...]
    f_up_values: tuple[float, ...]
    f_down_durations: tuple[float, ...]
    f_down_values: tuple[float, ...]
    eps_sigma: float

    def __post_init__(self) -> None:
        for name in ("tau_gap_up", "tau_dur_up", "tau_gap_down", "tau_dur_down"):
            if not getattr(self, name) > 0:
                raise DataError(f"{name} must be positive")
        if self.eps_sigma < 0:
            raise DataError("eps_sigma must be non-negative")
        for name in ("f_up", "f_down"):
            durs = getattr(self, f"{name}_durations")
            if len(durs) != len(getattr(self, f"{name}_values")) or not durs:
                raise DataError(f"{name} table must be non-empty and aligned")
            if any(d <= 0 for d in durs) or list(durs) != sorted(durs):
                raise DataError(f"{name} durations must be positive and ascending")


def deviation_for(stats: BalancingStats, direction: str, duration: float) -> float:
    """Mean percent deviation for an event of the given duration."""
    if direction == "up":
        durs, vals = stats.f_up_durations, stats.f_up_values
    elif direction == "down":
        durs, vals = stats.f_down_durations, stats.f_down_values
    else:
        raise DataError(f"direction must be 'up' or 'down', got {direction!r}")
    return float(np.interp(duration, durs, vals))


def _runs(active: np.ndarray) -> list[tuple[bool, int, int]]:
    """Run-length encoding: (state, start index, length) per run."""
    out = []
    start = 0
    for i in range(1, len(active) + 1):
        if i == len(active) or active[i] != active[start]:
            out.append((bool(active[start]), start, i - start))
            start = i
    return out


def _direction_stats(
    active: np.ndarray, deviations: np.ndarray, usable: np.ndarray, direction: str
) -> tuple[float, float, tuple, tuple, list[float]]:
    runs = _runs(active)
    durations = [r[2] for r in runs if r[0]]
    gaps = [r[2] for r in runs if not r[0]]
    if not durations:
        raise DataError(
            f"no {direction}-regulation events in the history; "
            "supply a longer observation window"
        )
    if not gaps:
        raise DataError(
            f"{direction}-regulation is always active in the history; "
            "supply a longer observation window"
        )

    by_duration: dict[int, list[float]] = {}
    residual_pool: list[float] = []
    for on, start, length in runs:
        if not on:
            continue
        hours = [
            deviations[t] for t in range(start, start + length) if usable[t]
        ]
        if hours:
            by_duration.setdefault(length, []).extend(hours)
    durs = sorted(by_duration)
    if not durs:
        raise DataError(
            f"{direction}-regulation events all fall on near-zero day-ahead "
            "prices; deviations are undefined"
        )
    values = [float(np.mean(by_duration[d])) for d in durs]
    table = dict(zip(durs, values))
    for on, start, length in runs:
        if on and length in table:
            for t in range(start, start + length):
                if usable[t]:
                    residual_pool.append(deviations[t] - table[length])
    return (
        float(np.mean(gaps)),
        float(np.mean(durations)),
        tuple(float(d) for d in durs),
        tuple(values),
        residual_pool,
    )


def estimate_balancing_stats(
    dayahead_prices: TimeSeries, up_prices: TimeSeries, down_prices: TimeSeries
) -> BalancingStats:
    """Estimate regulation gap/duration means and deviation curves.

    Up regulation is active when the up price exceeds the day-ahead price
    (and symmetrically below for down), with a small dead band; durations
    and gaps are run lengths of those indicators, including the inactive
    stretches touching the window edges.  Deviations are percentages of the
    absolute day-ahead price; hours where that price is inside the dead
    band are excluded from the deviation averages.
    """
    for other in (up_prices, down_prices):
        if other.start != dayahead_prices.start or len(other.values) != len(
            dayahead_prices.values
        ):
            raise DataError("balancing histories must align with the day-ahead series")
    da = dayahead_prices.values
    up = up_prices.values
    down = down_prices.values

    up_active = up > da + ACTIVATION_DEAD_BAND
    down_active = down < da - ACTIVATION_DEAD_BAND
    usable = np.abs(da) > ACTIVATION_DEAD_BAND
    scale = np.where(usable, np.abs(da), 1.0)
    up_dev = (up - da) / scale * 100.0
    down_dev = (da - down) / scale * 100.0

    gap_up, dur_up, durs_up, vals_up, pool_up = _direction_stats(
        up_active, up_dev, usable, "up"
    )
    gap_down, dur_down, durs_down, vals_down, pool_down = _direction_stats(
        down_active, down_dev, usable, "down"
    )
    pool = pool_up + pool_down
    eps_sigma = float(np.std(pool)) if len(pool) >= 2 else 0.0
    return BalancingStats(
        tau_gap_up=gap_up,
        tau_dur_up=dur_up,
        tau_gap_down=gap_down,
        tau_dur_down=dur_down,
        f_up_durations=durs_up,
        f_up_values=vals_up,
        f_down_durations=durs_down,
        f_down_values=vals_down,
        eps_sigma=eps_sigma,
    )


# ---------------------------------------------------------------------------
# Balancing deviation scenarios
# ---------------------------------------------------------------------------


class RandomDraws:
    """Sequential uniform/normal draws from one generator.

    Uniforms are drawn in (0, 1] so the exponential transform below never
    sees log(0).
    """

    def __init__(self, rng: np.random.Generator) -> None:
        self._rng = rng

    def uniform(self) -> float:
        return 1.0 - float(self._rng.random())

    def normal(self, sigma: float) -> float:
        return float(self._rng.normal(0.0, sigma))


def exponential_hours(draws, mean: float) -> float:
    """Inverse-transform exponential sample: -mean * ln(u)."""
    return -mean * float(np.log(draws.uniform()))


def _round_half_away(x: float) -> int:
    return int(np.floor(x + 0.5)) if x >= 0 else -int(np.floor(-x + 0.5))


def generate_balancing_deviations(
    stats: BalancingStats,
    horizon: int,
    count: int,
    seed: int,
    direction: str,
    draws_factory: Callable[[int], object] | None = None,
) -> np.ndarray:
    """Percent-deviation scenario matrix for one regulation direction.

    Each row walks the horizon: an exponential gap (mean ``tau_gap``) is
    followed by an exponential event duration (mean ``tau_dur``); event
    hours carry the duration's mean deviation plus white noise, all other
    hours are zero.  Draw order per event is gap uniform, duration
    uniform, then one normal per event hour, so a recorded draw sequence
    replays the construction exactly.
    """
    if horizon < 1:
        raise DataError("horizon must be at least one hour")
    if count < 1:
        raise DataError("count must be at least 1")
    if direction == "up":
        tau_gap, tau_dur = stats.tau_gap_up, stats.tau_dur_up
    elif direction == "down":
        tau_gap, tau_dur = stats.tau_gap_down, stats.tau_dur_down
    else:
        raise DataError(f"direction must be 'up' or 'down', got {direction!r}")
    if draws_factory is None:
        base = derive_seed(seed, "balancing-deviations", direction)

        def draws_factory(row: int) -> RandomDraws:
            return RandomDraws(stream_rng(base, row))

    out = np.zeros((count, horizon))
    for w in range(count):
        draws = draws_factory(w)
        t = 1  # hours are 1-based inside the event walk
        while t <= horizon:
            gap = exponential_hours(draws, tau_gap)
            dur = exponential_hours(draws, tau_dur)
            t_start = min(horizon, _round_half_away(t + gap))
            t_end = min(horizon, _round_half_away(t + gap + dur))
            level = deviation_for(stats, direction, dur)
            for h in range(t_start + 1, t_end + 1):
                out[w, h - 1] = level + draws.normal(stats.eps_sigma)
            t = t_end + 1
    out.setflags(write=False)
    return out


def combine_balancing_prices(
    up_dev: np.ndarray, down_dev: np.ndarray, dayahead_forecast
) -> tuple[ScenarioSet, ScenarioSet]:
    """Turn deviation matrices into up/down balancing price scenarios.

    Up and down regulation cannot be active in the same hour, so the net
    deviation is up minus down; only its positive part moves the up price
    and only its negative part the down price.  Deviations scale the
    absolute day-ahead price, preserving up >= day-ahead >= down for
    negative prices too.
    """
    up_dev = np.asarray(up_dev, dtype=float)
    down_dev = np.asarray(down_dev, dtype=float)
    if up_dev.shape != down_dev.shape:
        raise DataError("up and down deviation matrices must have the same shape")
    base = (
        dayahead_forecast.values
        if isinstance(dayahead_forecast, TimeSeries)
        else np.asarray(dayahead_forecast, dtype=float)
    )
    if up_dev.shape[1] != len(base):
        raise DataError(
            f"deviation horizon {up_dev.shape[1]} != forecast horizon {len(base)}"
        )
    net = up_dev - down_dev
    scale = np.abs(base)[None, :] / 100.0
    up_prices = base[None, :] + scale * np.maximum(net, 0.0)
    down_prices = base[None, :] - scale * np.maximum(-net, 0.0)
    prob = np.full(up_dev.shape[0], 1.0 / up_dev.shape[0])
    return (
        ScenarioSet("UpPrice", up_prices, prob),
        ScenarioSet("DownPrice", down_prices, prob),
    )


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def dump_scenarios(sset: ScenarioSet) -> tuple[str, str]:
    """(matrix text, probability text): one scenario per line, no header."""
    matrix = "\n".join(
        ",".join(repr(float(v)) for v in row) for row in sset.trajectories
    )
    probs = "\n".join(repr(float(p)) for p in sset.probabilities)
    return matrix + "\n", probs + "\n"


def load_scenarios(matrix_text: str, prob_text: str, label: str) -> ScenarioSet:
    """Rebuild a ScenarioSet written by :func:`dump_scenarios`."""
    try:
        rows = [
            [float(v) for v in line.split(",")]
            for line in matrix_text.strip().splitlines()
        ]
        probs = [float(line) for line in prob_text.strip().splitlines()]
    except ValueError as exc:
        raise DataError(f"malformed scenario text: {exc}") from exc
    return ScenarioSet(label, np.asarray(rows), np.asarray(probs))
