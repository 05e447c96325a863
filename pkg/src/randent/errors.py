"""Exception types shared across the package."""


class RandentError(Exception):
    """Base class for all package errors."""


class ShapeError(RandentError, ValueError):
    """Dimensions of a state, operator or subspace do not fit together."""


class DomainError(RandentError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class FeasibilityError(RandentError, RuntimeError):
    """A brute-force guard refused a request that would blow up in size."""
