"""Exception hierarchy.

Two families matter to callers: :class:`DataError` for bad inputs (files,
series that are too short, non-finite values) and :class:`ModelError` for
problems with the statistical model itself (singular moment matrices,
error variances that exceed the observed variability, non-stationary
parameters). The command-line driver maps them to exit codes 1 and 2.
"""

from __future__ import annotations


class ErrtsError(Exception):
    """Base class for all package errors."""


class DataError(ErrtsError, ValueError):
    """Input data is malformed or insufficient."""


class ModelError(ErrtsError, ValueError):
    """The requested model cannot be evaluated or fitted."""


class ConditioningError(ModelError):
    """A moment or normal-equation matrix is singular or ill-conditioned."""

    def __init__(self, message: str, condition: float | None = None):
        if condition is not None:
            message = f"{message} (condition number {condition:.3g})"
        super().__init__(message)
        self.condition = condition


class NonStationaryError(ModelError):
    """AR coefficients lie outside the stationarity region."""


class BoundViolationError(ModelError):
    """Measurement-error variance is incompatible with the observed variance."""


class OvercorrectionError(BoundViolationError):
    """Corrected lag-0 autocovariance is not positive."""


class TruncationError(ModelError):
    """An infinite autocovariance sum could not be truncated to tolerance."""


class MissingMomentError(ModelError, KeyError):
    """A mixed moment required by a covariance formula was not supplied."""

    def __str__(self) -> str:  # KeyError would otherwise repr() the message
        return str(self.args[0]) if self.args else ""
