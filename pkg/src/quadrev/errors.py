"""Exception types shared across the package."""


class QuadricError(Exception):
    """Base class for all package errors."""


class DomainError(QuadricError, ValueError):
    """Input lies outside the domain of an operation."""


class ZeroSetError(DomainError):
    """Field vanishes (within the floor) where division by it is required."""


class PositivityError(DomainError):
    """A strictly positive field value was required."""


class ParameterError(QuadricError, ValueError):
    """Inconsistent or invalid parameters."""


class NoSolutionError(ParameterError):
    """C^2 + c^2 - 1 < 0: the constant S would be imaginary."""


class ExcludedCaseError(ParameterError):
    """The constant branch w^2 = c^2 - 1, which the classification excludes."""


class UnrepresentableError(ParameterError):
    """Surface has no focal radial representation (e.g. one-sheeted hyperboloid)."""


class NoElementsError(ParameterError):
    """Surface kind has no centre / second focus."""


class UnsupportedStrategyError(ParameterError):
    pass


class SamplingError(QuadricError, RuntimeError):
    """Rejection sampling acceptance rate too low."""


class DegenerateGeometryError(QuadricError, ValueError):
    """Least-squares design is under-determined or rank deficient."""
