"""Exception types shared across the package.

The CLI maps these onto exit codes: DataError and subclasses exit with 2,
SolverError with 3.
"""

from __future__ import annotations


class DhbidError(Exception):
    """Base class for errors raised by this package."""


class DataError(DhbidError):
    """Invalid input data: config files, time series, scenario inputs."""


class ConfigError(DataError):
    """Portfolio or run configuration violates the documented schema."""


class SolverError(DhbidError):
    """LP solve failed in a way that is not a regular status (numerics, setup)."""
