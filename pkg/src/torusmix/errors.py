"""Exceptions shared across the package."""


class BudgetExceeded(RuntimeError):
    """A computation would exceed its configured size budget.

    ``stage`` names the computation and ``suggestion`` the recommended fallback.
    """

    def __init__(self, message, *, stage="", suggestion=""):
        super().__init__(message)
        self.stage = stage
        self.suggestion = suggestion


class TruncationError(RuntimeError):
    """A truncated distribution lost more probability mass than allowed."""


class InvariantViolation(RuntimeError):
    """An internal consistency check failed."""


class NoDecayError(RuntimeError):
    """No decay could be detected, so a series tail cannot be bounded."""
