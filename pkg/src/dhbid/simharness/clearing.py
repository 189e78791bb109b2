"""Market clearing: realized outcomes and stepwise offer-curve settlement.

An hour's :class:`MarketOutcome` bundles the realized day-ahead and
regulation prices with the regulation state reconstructed from them: Up when
the up price sits above the day-ahead price beyond the activation dead band,
Down symmetrically below, otherwise None. Clearing walks the submitted
stepwise curves against those prices.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

import math

from ..errors import DataError
from ..scengen import ACTIVATION_DEAD_BAND
from ..stochmodels import CURVE_DAY_AHEAD, CURVE_DOWN, CURVE_UP, BidCurve

REG_NONE = "None"
REG_UP = "Up"
REG_DOWN = "Down"
REG_STATES = (REG_NONE, REG_UP, REG_DOWN)


@dataclass(frozen=True)
class MarketOutcome:
    """Realized prices and the regulation direction of one delivery hour."""

    hour: int
    dayahead_price: float
    up_price: float
    down_price: float
    regulation_state: str

    def __post_init__(self) -> None:
        if self.regulation_state not in REG_STATES:
            raise DataError(f"unknown regulation state {self.regulation_state!r}")
        for name in ("dayahead_price", "up_price", "down_price"):
            if not math.isfinite(getattr(self, name)):
                raise DataError(f"hour {self.hour}: {name} must be finite")
        if (
            self.regulation_state == REG_UP
            and self.up_price < self.dayahead_price - ACTIVATION_DEAD_BAND
        ):
            raise DataError(
                f"hour {self.hour}: up regulation with up price below day-ahead"
            )
        if (
            self.regulation_state == REG_DOWN
            and self.down_price > self.dayahead_price + ACTIVATION_DEAD_BAND
        ):
            raise DataError(
                f"hour {self.hour}: down regulation with down price above day-ahead"
            )


def outcome_for(
    hour: int, dayahead_price: float, up_price: float, down_price: float
) -> MarketOutcome:
    """Classify an hour from its realized prices.

    Regulating-price files do not flag activation; the direction is read off
    the prices themselves, with the same dead band the scenario models use.
    """
    up_active = up_price > dayahead_price + ACTIVATION_DEAD_BAND
    down_active = down_price < dayahead_price - ACTIVATION_DEAD_BAND
    if up_active and down_active:
        raise DataError(
            f"hour {hour}: prices show up and down regulation at once "
            f"(day-ahead {dayahead_price}, up {up_price}, down {down_price})"
        )
    state = REG_UP if up_active else REG_DOWN if down_active else REG_NONE
    return MarketOutcome(hour, dayahead_price, up_price, down_price, state)


def clear_dayahead(curve: BidCurve, realized_price: float) -> float:
    """Committed MWh: the highest-price step at or below the realized price.

    Below the lowest step only a purchase clears (negative volumes persist
    downward, supply offers lapse); above the highest step the last volume
    extends flat.
    """
    if curve.kind != CURVE_DAY_AHEAD:
        raise DataError(f"cannot day-ahead clear a {curve.kind} curve")
    lowest_price, lowest_volume = curve.steps[0]
    if realized_price < lowest_price:
        return lowest_volume if lowest_volume < 0 else 0.0
    return curve.quantity_at(realized_price)


def clear_balancing(
    up_curve: BidCurve | None, down_curve: BidCurve | None, outcome: MarketOutcome
) -> tuple[float, float]:
    """Activated (up MWh, down MWh) for the hour's regulation state.

    Up offers clear like supply: the highest step price at or below the
    realized up price. Down offers clear against a falling price, so the
    lowest step price at or above the realized down price wins; in both
    directions no qualifying step means no activation.
    """
    if up_curve is not None and up_curve.kind != CURVE_UP:
        raise DataError(f"up offer has kind {up_curve.kind!r}")
    if down_curve is not None and down_curve.kind != CURVE_DOWN:
        raise DataError(f"down offer has kind {down_curve.kind!r}")
    if outcome.regulation_state == REG_UP and up_curve is not None:
        if outcome.up_price < up_curve.steps[0][0]:
            return 0.0, 0.0
        return up_curve.quantity_at(outcome.up_price), 0.0
    if outcome.regulation_state == REG_DOWN and down_curve is not None:
        prices = [p for p, _ in down_curve.steps]
        k = bisect_left(prices, outcome.down_price)
        if k == len(prices):
            return 0.0, 0.0
        return 0.0, down_curve.steps[k][1]
    return 0.0, 0.0
