"""Exception types shared across the package."""


class ChronosError(Exception):
    """Base class for all library errors."""


class ParameterError(ChronosError, ValueError):
    """A constructor or operation argument violates its precondition."""


class DomainError(ChronosError, ValueError):
    """A state or evaluation point lies outside the admissible domain
    (e.g. Gaussian tail reaching the excised p = 0 region, or p = 0 itself)."""


class GridMismatchError(ChronosError, ValueError):
    """Two objects that must share a grid do not."""


class UnboundedIntervalError(ChronosError, ValueError):
    """A finite time interval is required (moments of unbounded sets go
    through the density path instead)."""


class TruncationError(ChronosError, RuntimeError):
    """The time window does not capture enough probability mass for the
    requested operation.  Carries the captured mass."""

    def __init__(self, message, captured_mass=None):
        super().__init__(message)
        self.captured_mass = captured_mass


class NumericalConsistencyError(ChronosError, ArithmeticError):
    """A quantity that must be nonnegative (up to rounding) came out
    significantly negative, indicating a broken invariant."""
