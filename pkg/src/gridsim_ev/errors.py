"""Exception hierarchy shared across the package.

Each class maps to one CLI exit-code category (see cli.EXIT_CODES).
"""


class GridSimError(Exception):
    """Base class for all package errors."""


class GridFormatError(GridSimError):
    """Malformed grid/scenario document (syntax, references, units)."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class GridValidationError(GridSimError):
    """A grid failed invariant validation where a valid grid is required."""


class PowerFlowError(GridSimError):
    """Power flow could not be solved (divergence, singular network)."""

    def __init__(self, message, step=None):
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
        self.step = step


class CalibrationError(GridSimError):
    """Baseline calibration target unreachable within multiplier bounds."""


class ScheduleError(GridSimError):
    """Infeasible charging session set or schedule verification failure."""
