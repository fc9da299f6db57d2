"""Exception types raised across the package."""


class MuskatError(Exception):
    """Base class for all package errors."""


class DataError(MuskatError, ValueError):
    """Input data is malformed (non-finite values, wrong shape, ...)."""


class NonFiniteError(MuskatError, FloatingPointError):
    """A computation produced NaN or Inf."""


class SeriesRefusal(MuskatError, ValueError):
    """A series evaluation was requested outside its certified region."""


class StabilityError(MuskatError, ValueError):
    """A time step violates the stability bound of the chosen scheme."""


class ConfigError(MuskatError, ValueError):
    """A run configuration failed validation."""
