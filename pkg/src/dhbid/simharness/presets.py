"""Experiment presets: named information setups for replay runs.

A preset decides what the bidder is allowed to know: the realized
trajectories (PerfectInformation), a single point forecast
(SingleBidForecast), or scenario fans (the Stochastic* family), plus the
parameterized sweeps. Parameters ride along in the name, e.g.
``ResUncertaintyAblation(wind)``, ``TariffSweep(49.52,200,359.98)``, or
``StepCountSweep(2,5,10,20)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ConfigError

PRESET_PERFECT = "PerfectInformation"
PRESET_SINGLE_BID = "SingleBidForecast"
PRESET_STOCHASTIC = "StochasticFull"
PRESET_NO_BALANCING = "StochasticNoBalancing"
PRESET_ABLATION = "ResUncertaintyAblation"
PRESET_TARIFF_SWEEP = "TariffSweep"
PRESET_STEP_SWEEP = "StepCountSweep"

_BARE = (PRESET_PERFECT, PRESET_SINGLE_BID, PRESET_STOCHASTIC, PRESET_NO_BALANCING)
ABLATION_VARIANTS = ("wind", "solar", "both", "none")


@dataclass(frozen=True)
class ExperimentPreset:
    """A validated preset: base name plus optional variant or level list."""

    name: str
    variant: str | None = None
    levels: tuple[float, ...] = ()
    steps: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.name in _BARE:
            if self.variant or self.levels or self.steps:
                raise ConfigError(f"preset {self.name} takes no parameters")
        elif self.name == PRESET_ABLATION:
            if self.variant not in ABLATION_VARIANTS:
                raise ConfigError(
                    f"{PRESET_ABLATION} needs a variant in "
                    f"{'/'.join(ABLATION_VARIANTS)}, got {self.variant!r}"
                )
        elif self.name == PRESET_TARIFF_SWEEP:
            if len(self.levels) < 1:
                raise ConfigError(f"{PRESET_TARIFF_SWEEP} needs at least one level")
            if any(not lvl >= 0 for lvl in self.levels):
                raise ConfigError("tariff levels must be non-negative numbers")
        elif self.name == PRESET_STEP_SWEEP:
            if len(self.steps) < 1:
                raise ConfigError(f"{PRESET_STEP_SWEEP} needs at least one step count")
            if any(s < 1 for s in self.steps):
                raise ConfigError("step counts must be positive integers")
        else:
            raise ConfigError(f"unknown preset {self.name!r}")

    @property
    def uses_balancing(self) -> bool:
        """Whether replays under this preset trade the balancing market."""
        return self.name not in (PRESET_SINGLE_BID, PRESET_NO_BALANCING)

    @property
    def wind_uncertain(self) -> bool:
        if self.name == PRESET_ABLATION:
            return self.variant in ("wind", "both")
        return self.name not in (PRESET_PERFECT,)

    @property
    def solar_uncertain(self) -> bool:
        if self.name == PRESET_ABLATION:
            return self.variant in ("solar", "both")
        return self.name not in (PRESET_PERFECT,)

    def __str__(self) -> str:
        if self.name == PRESET_ABLATION:
            return f"{self.name}({self.variant})"
        if self.levels:
            return f"{self.name}({','.join(repr(lvl) for lvl in self.levels)})"
        if self.steps:
            return f"{self.name}({','.join(str(s) for s in self.steps)})"
        return self.name


_NAME_RE = re.compile(r"^([A-Za-z]+)(?:\((.*)\))?$")


def parse_preset(text: str) -> ExperimentPreset:
    """Parse a preset name as written on the command line."""
    m = _NAME_RE.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse preset {text!r}")
    name, args = m.group(1), m.group(2)
    if name in _BARE:
        if args is not None:
            raise ConfigError(f"preset {name} takes no parameters")
        return ExperimentPreset(name)
    if name == PRESET_ABLATION:
        return ExperimentPreset(name, variant=(args or "").strip())
    if name == PRESET_TARIFF_SWEEP:
        return ExperimentPreset(name, levels=_floats(args, name))
    if name == PRESET_STEP_SWEEP:
        return ExperimentPreset(name, steps=_ints(args, name))
    raise ConfigError(f"unknown preset {name!r}")


def _floats(args: str | None, name: str) -> tuple[float, ...]:
    if not args or not args.strip():
        raise ConfigError(f"{name} needs a parenthesized list of numbers")
    try:
        return tuple(float(a) for a in args.split(","))
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _ints(args: str | None, name: str) -> tuple[int, ...]:
    if not args or not args.strip():
        raise ConfigError(f"{name} needs a parenthesized list of integers")
    try:
        return tuple(int(a) for a in args.split(","))
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc
