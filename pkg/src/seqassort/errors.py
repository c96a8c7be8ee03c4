"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SeqAssortError(Exception):
    """Base class for all package errors."""


class UnknownItem(SeqAssortError, KeyError):
    """An item id outside ``[0, n)`` was referenced."""


class ModelMismatch(SeqAssortError, TypeError):
    """A demand parameter or model spec has the wrong variant for the operation."""


class ShadowExceedsAttraction(SeqAssortError, ValueError):
    """A GAM item realized an attraction below its shadow attraction."""


class TooLarge(SeqAssortError):
    """An exhaustive computation would exceed its configured cap."""


class SupportTooLarge(TooLarge):
    """The joint utility support of a RUM assortment exceeds the atom limit."""


EnumerationTooLarge = TooLarge


class NormalizationError(SeqAssortError, ArithmeticError):
    """Choice probabilities failed to sum to one."""


class InvalidInstance(SeqAssortError, ValueError):
    """An instance violates one or more invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NegativeValue(SeqAssortError, ValueError):
    """A threshold or expected value that must be non-negative is negative."""


class IncompatiblePolicy(SeqAssortError, ValueError):
    """A policy configuration does not match the instance constraint."""


class NonPositiveReward(SeqAssortError, ValueError):
    """A reduction instance received a reward that is not strictly positive."""
