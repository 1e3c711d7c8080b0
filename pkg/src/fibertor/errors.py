"""Exception hierarchy shared by every fibertor module."""


class FibertorError(Exception):
    """Base class for all errors raised by fibertor."""


class DimensionError(FibertorError, ValueError):
    """A matrix has the wrong shape for the requested operation."""


class DomainError(FibertorError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConvergenceError(FibertorError, ArithmeticError):
    """A numerical certificate could not be produced within budget."""


class NotInvariantError(DomainError):
    """An automorphism does not preserve the subgroup defining a cover."""


class DisconnectedCoverError(DomainError):
    """Permutation data does not define a transitive (connected) cover."""


class InvalidQuotientError(DomainError):
    """Quotient data does not define a homomorphism of the group."""


class NotUniversalTowerError(DomainError):
    """A sequence of moduli violates the divisibility chain of a tower."""


class UnsupportedScaleError(FibertorError):
    """A computation exceeds the configured size caps."""
