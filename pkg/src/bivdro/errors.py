"""Exception hierarchy shared across the package."""

from __future__ import annotations


class BivdroError(Exception):
    """Base class for all library errors."""


class DomainError(BivdroError, ValueError):
    """Input outside the domain of an operation (infeasible moments, bad q or eta)."""

    def __init__(self, message: str, invariant: str | None = None):
        super().__init__(message)
        self.invariant = invariant


class ConsistencyError(BivdroError, ArithmeticError):
    """Two independent routes to the same quantity disagree beyond tolerance."""


class CertificateUnavailable(BivdroError):
    """A closed-form dual certificate does not exist for a degenerate branch."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class OracleInfeasible(BivdroError):
    """The discretized LP has no feasible point for the requested slack."""

    def __init__(self, message: str, constraint: str, suggested_slack: float):
        super().__init__(message)
        self.constraint = constraint
        self.suggested_slack = suggested_slack
