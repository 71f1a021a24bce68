"""Elo-driven Poisson match models and Monte Carlo cup forecasting."""

from cupsim.errors import (
    CupsimError,
    DataError,
    FitError,
    InsufficientDataError,
)

__version__ = "0.1.0"

__all__ = [
    "CupsimError",
    "DataError",
    "FitError",
    "InsufficientDataError",
    "__version__",
]
