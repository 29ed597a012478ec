"""Exception hierarchy shared by every module.

Anything derived from :class:`NumericError` maps to CLI exit code 2.
"""


class NumericError(Exception):
    """Base class for failures of a numerical procedure."""


class PoleError(NumericError):
    """Evaluation requested at the pole s = 1."""


class ConvergenceError(NumericError):
    """A series or iteration did not reach its target accuracy."""


class NoZeroError(NumericError):
    """The argument-principle count found no zero in the search window."""


class TruncationError(NumericError):
    """A Fock truncation is too small for the requested amplitude."""


class PrecisionOverflowError(NumericError, OverflowError):
    """Intermediate magnitudes exceed the available floating range."""


class DegenerateError(NumericError):
    """A denominator fell below its floor."""


class DomainError(NumericError):
    """An argument left the domain where a formula is defined (e.g. a negative radicand)."""


class ClaimViolation(NumericError):
    """A stated mathematical fact failed numerically."""
