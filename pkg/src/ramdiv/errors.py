"""Exception types shared across the package.

Estimator routines never raise on non-finite *results*: a divergence that is
genuinely infinite, or a Monte-Carlo term that overflows, is reported as an
``inf``/``nan`` value so callers can flag it.  Exceptions are reserved for
contract violations on the inputs.
"""


class RamdivError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(RamdivError):
    """Inputs have mismatched or invalid dimensions."""


class DomainError(RamdivError):
    """A numeric argument lies outside its admissible domain."""


class NumericalError(RamdivError):
    """A numerical routine failed (non-SPD matrix, singular covariance, ...)."""


class UnsupportedError(RamdivError):
    """The requested operation is not defined for this divergence."""


class UsageError(RamdivError):
    """A function was called in a way that violates its contract."""
