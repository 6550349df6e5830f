"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2,
NumericError -> 3, OSError/IOError -> 4.
"""


class ApAnomalyError(Exception):
    """Base class for package errors."""


class ValidationError(ApAnomalyError):
    """An input, spec field or file violated a documented invariant."""


class NumericError(ApAnomalyError):
    """A numerical operation failed (non-PD covariance, underflow, ...)."""


class InternalError(ApAnomalyError):
    """An internal consistency check failed; indicates a bug."""
