"""Semantic exception hierarchy shared by all modules."""


class TruncMeanError(Exception):
    """Base class for all library errors."""


class DomainError(TruncMeanError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class InvalidParameter(TruncMeanError, ValueError):
    """A configuration parameter violates its contract (sign, range, length)."""


class NumericalError(TruncMeanError, ArithmeticError):
    """A value that is analytically impossible showed up (defensive assert)."""


class NoRoot(TruncMeanError, RuntimeError):
    """A root search exhausted its bracket without finding a sign change."""


class AdmissibilityError(TruncMeanError, ValueError):
    """The deterministic schedule violates its admissibility condition."""


class EmptyFamily(TruncMeanError, RuntimeError):
    """Every candidate interval intersection on the adaptation grid is empty."""
