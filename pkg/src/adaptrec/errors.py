"""Exception types shared across the package."""


class AdaptrecError(Exception):
    """Base class for errors raised by this package."""


class DomainError(AdaptrecError, ValueError):
    """Input outside the documented domain (non-finite, wrong length, ...)."""


class ContractViolation(AdaptrecError, ValueError):
    """A structural precondition failed (empty color set, bad schedule, ...)."""


class NotACellError(AdaptrecError, ValueError):
    """Cell description does not name a nonempty cell of the partition."""


class BudgetExhaustedError(AdaptrecError, RuntimeError):
    """A measurement oracle was asked for more queries than it allows."""


class PrecisionExceededError(AdaptrecError, RuntimeError):
    """float64 mode cannot certify the result; rerun in exact mode."""


class OutsideCoveringError(AdaptrecError, ValueError):
    """Query point is not covered by any set of the covering."""


class TruncationLimitError(DomainError):
    """Requested index lies beyond the truncated operator."""
