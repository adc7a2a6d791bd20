"""Exception taxonomy shared across the package.

Deliberately small: parse errors carry a source location, data errors
(shape/bounds) share a base class so callers can map them onto a single
exit code, and optimizer divergence is its own failure mode.
"""

from __future__ import annotations


class SoftLtlfError(Exception):
    """Base class for every error this package raises on purpose."""


class DataError(SoftLtlfError):
    """Malformed tensors, traces, indexes, or trajectory data."""


class ShapeError(DataError):
    """Dimension tuples disagree with each other or with the element count."""


class BoundsError(DataError):
    """An index fell outside the shape it was applied to."""


class ParseError(SoftLtlfError):
    """Formula text rejected by the grammar, with a source location."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.message} (line {self.line}, column {self.column})"


class DivergenceError(SoftLtlfError):
    """Optimization produced a non-finite loss or parameter."""
