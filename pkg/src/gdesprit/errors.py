"""Exception types shared across the package.

Everything that signals a bad argument derives from ValueError so callers
that do not care about the fine-grained type can catch the builtin.
Runtime failures of the numerical pipeline derive from RuntimeError.
"""

from __future__ import annotations


class DomainError(ValueError):
    """Invalid index-set construction or incompatible domains."""


class DecompositionError(DomainError):
    """No valid domain decomposition exists (e.g. erosion came out empty)."""


class DegenerateFiberError(DomainError):
    """A fiber of the target grid is a singleton or has gaps."""

    def __init__(self, message: str, fiber=None, dimension: int | None = None):
        super().__init__(message)
        self.fiber = fiber
        self.dimension = dimension


class CoverageError(ValueError):
    """A sample needed to fill the structured matrix is missing."""

    def __init__(self, message: str, missing=None):
        super().__init__(message)
        self.missing = missing


class NonFiniteError(ValueError):
    """Sample values or evaluated model values are not finite."""


class ModelOrderError(ValueError):
    """Requested model order is unsupported by the data."""


class CapacityError(ValueError):
    """Model order exceeds what the target grid can resolve."""

    def __init__(self, message: str, capacity: int | None = None, requested: int | None = None):
        super().__init__(message)
        self.capacity = capacity
        self.requested = requested


class RankDeficiencyError(ValueError):
    """Least-squares system lost full column rank."""

    def __init__(self, message: str, rank: int | None = None):
        super().__init__(message)
        self.rank = rank


class GenerationError(RuntimeError):
    """Random model generation could not satisfy its constraints."""


class PairingError(RuntimeError):
    """Joint diagonalization failed to pair frequency components."""

    def __init__(self, message: str, residuals=None, attempts: int | None = None):
        super().__init__(message)
        self.residuals = residuals
        self.attempts = attempts
