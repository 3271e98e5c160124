"""Exception types shared across the toolkit.

Parse-time errors carry a character position into the source text so the
CLI can point at the offending token.
"""

from __future__ import annotations


class RecurError(Exception):
    """Base class for all toolkit errors.

    ``position`` is a 0-based character offset into the input text when the
    error originates from parsing, else None.
    """

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.message = message
        self.position = position

    def __str__(self) -> str:
        if self.position is not None:
            return f"{self.message} (at position {self.position})"
        return self.message


class FormulaSyntaxError(RecurError):
    """Input does not conform to the formula grammar."""


class NonAffineError(RecurError):
    """A distributed term has zero or more than one X factor.

    This is how gated recursions (products of state-dependent factors) are
    rejected: their terms are not of the form coefficient * X.
    """


class NonCausalError(RecurError):
    """A state refers to itself or to a later state."""


class RangeError(RecurError):
    """An index is outside its admissible range.

    Raised for W indices outside [1, lhs] and X indices below 0 in formulas,
    and for alpha/k combinations outside the studentized-range table in the
    ranking statistics.
    """


class DepthError(RecurError):
    """Requested expansion depth exceeds the configured cap."""


class UnrealizableError(RecurError):
    """A coefficient polynomial has no single-block wiring realization."""


class SizeError(RecurError):
    """Graph too large for the isomorphism check."""


class ActivationError(RecurError):
    """Activation requested for a formula without a built-in activated form."""


class DegenerateError(RecurError):
    """Statistic undefined for the given input (division by zero)."""
