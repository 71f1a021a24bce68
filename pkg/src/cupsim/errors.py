"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CupsimError(Exception):
    """Base class for all errors raised by this package."""


class DataError(CupsimError):
    """Malformed or inconsistent input data.

    Carries the file line number when the problem can be pinned to one row.
    """

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        parts = [message]
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field '{field}'")
        super().__init__(": ".join(parts) if len(parts) > 1 else message)


class InsufficientDataError(CupsimError):
    """A team does not have enough retained observations to fit a model."""

    def __init__(self, team: str, n_found: int, n_required: int, context: str = ""):
        self.team = team
        self.n_found = n_found
        self.n_required = n_required
        detail = f"insufficient data for {team}: {n_found} observations, need {n_required}"
        if context:
            detail += f" ({context})"
        super().__init__(detail)


class FitError(CupsimError):
    """Model fitting failed (rank deficiency, divergence, ...)."""

    def __init__(self, message: str, trace: list[float] | None = None):
        self.trace = list(trace) if trace is not None else []
        super().__init__(message)
