"""Exceptions shared across the package.

The CLI maps these onto exit codes: invalid input or configuration -> 2,
numerical failure -> 3, violated internal invariant -> 4.
"""


class PlfcError(Exception):
    """Base class for errors raised by this package."""


class InputError(PlfcError):
    """Invalid user-supplied data, file content, or configuration."""


class ConvergenceError(PlfcError):
    """An iterative solver did not reach the requested tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class EmptySegmentError(PlfcError):
    """A knot configuration leaves a basis function with no supporting data."""


class InvariantError(PlfcError):
    """An internal consistency check failed; indicates a bug, not bad input."""
