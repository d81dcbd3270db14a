"""Exception types shared across the package."""

from __future__ import annotations


class ShotgunError(Exception):
    """Base class for all package-specific errors."""


class ComplexityExceeded(ShotgunError):
    """Raised when a graph's cycle complexity exceeds the configured bound.

    Canonical labelling of rooted graphs is only supported up to a bounded
    number of independent cycles; callers may retry with a larger bound.
    """

    def __init__(self, complexity: int, bound: int):
        self.complexity = complexity
        self.bound = bound
        super().__init__(
            f"graph complexity {complexity} exceeds configured bound {bound}"
        )


class SearchBudgetExceeded(ShotgunError):
    """Raised when a backtracking search exhausts its node budget."""

    def __init__(self, budget: int, what: str = "search"):
        self.budget = budget
        super().__init__(f"{what} exceeded node budget of {budget}")


class InvalidGamma(ShotgunError):
    """Raised when an isomorphism probability yields a decay rate >= 1."""


class MatchFailure(ShotgunError):
    """Raised when peeling small components cannot match a neighborhood multiset."""


class CertificateMismatch(ShotgunError):
    """Raised when a surgery certificate does not describe the given graph."""


class InconsistentAdjacency(ShotgunError):
    """Raised when two profile entries disagree about an edge between good vertices."""
