"""Pseudo-spectral simulation and a priori bound monitors for the Muskat contour equation."""

__version__ = "0.1.0"

from .constants import SeriesCondition, closed_form, decay_margin, solve_constant  # noqa: E402
from .diagnostics import DiagnosticsReport, dissipation, measure  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    DataError,
    MuskatError,
    NonFiniteError,
    SeriesRefusal,
    StabilityError,
)
from .evolution import SchemeSpec, integrate, mollify_initial, run, step  # noqa: E402
from .grid import Grid, InterfaceField, norm_s  # noqa: E402
from .nonlinearity import (  # noqa: E402
    DirectPath,
    LinearPath,
    RegularizedPath,
    SeriesBudget,
    SeriesPath,
    rhs_direct,
    rhs_regularized,
    rhs_series,
)

__all__ = [
    "__version__",
    "Grid",
    "InterfaceField",
    "norm_s",
    "SeriesCondition",
    "solve_constant",
    "closed_form",
    "decay_margin",
    "DirectPath",
    "SeriesPath",
    "SeriesBudget",
    "RegularizedPath",
    "LinearPath",
    "rhs_direct",
    "rhs_series",
    "rhs_regularized",
    "SchemeSpec",
    "step",
    "integrate",
    "run",
    "mollify_initial",
    "dissipation",
    "measure",
    "DiagnosticsReport",
    "MuskatError",
    "DataError",
    "ConfigError",
    "NonFiniteError",
    "SeriesRefusal",
    "StabilityError",
]
