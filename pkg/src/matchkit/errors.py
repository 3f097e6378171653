"""Shared exception types."""


class MatchkitError(Exception):
    """Base class for errors raised by this package."""


class ParseError(MatchkitError):
    """Raised when an instance file is malformed.

    Carries the 1-based line number the problem was detected on.
    """

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"Line {line}: {message}")


class InapplicableError(MatchkitError):
    """Raised when an algorithm is run on an instance outside its domain."""


class UnsolvableError(MatchkitError):
    """Raised when an instance admits no solution of the requested kind."""


class BudgetError(MatchkitError):
    """Raised when a brute-force search would exceed its configured budget."""


class TimeoutError_(MatchkitError):
    """Raised when a computation exceeds its deadline."""


class ParamError(MatchkitError):
    """Invalid generator parameter combination."""
