"""Exception types shared across the clockforge modules."""

from __future__ import annotations


class ClockforgeError(Exception):
    """Base class for all clockforge errors."""


class DomainError(ClockforgeError, ValueError):
    """A parameter lies outside the domain where the operation is defined."""


class SizeError(ClockforgeError):
    """Requested Hilbert space exceeds the configured dimension cap."""


class BracketingFailure(ClockforgeError):
    """A sign change of a quantization condition could not be isolated."""


class ConvergenceFailure(ClockforgeError):
    """An eigensolver failed to converge."""


class NotConserved(ClockforgeError):
    """An operator couples two different sectors of a proposed decomposition."""

    def __init__(self, row: int, col: int, value: float, row_key: int, col_key: int):
        self.entry = (row, col, value)
        self.row_key, self.col_key = row_key, col_key
        super().__init__(
            f"entry ({row}, {col}) = {value!r} couples sector {row_key} to sector {col_key}"
        )


class Case1Error(ClockforgeError):
    """A properly initialised, fully accepted vector exists (yes-instance)."""


class NotNoInstance(ClockforgeError):
    """The verifier accepts some valid input with probability above epsilon."""


class PathInvalid(ClockforgeError):
    """A canonical path step is not an edge of the legal-state graph."""

    def __init__(self, s, t, step):
        self.s, self.t, self.step = s, t, step
        super().__init__(f"canonical path {s} -> {t}: step {step} is not a graph edge")


class IntegratorTolerance(ClockforgeError):
    """Adaptive integration did not reach the requested accuracy."""


class RangeError(ClockforgeError, ValueError):
    """A time argument lies outside the schedule."""


class DegeneracyWarning(UserWarning):
    """A two-dimensional Jordan block is numerically degenerate."""
