"""Exception hierarchy for defect-control."""


class DefectControlError(Exception):
    """Base class for all errors raised by defect-control."""


class InvalidResolutionError(DefectControlError, ValueError):
    """Grid resolution below the minimum of two subdivisions."""


class DimensionError(DefectControlError, ValueError):
    """Fields or operators defined on incompatible grids."""


class NonFiniteFieldError(DefectControlError, ValueError):
    """A field contains NaN or infinite entries."""


class InvalidProblemError(DefectControlError, ValueError):
    """A problem definition violates its preconditions."""


class SolverIterationLimitError(DefectControlError):
    """Conjugate gradients stopped before reaching the requested tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DegenerateDirectionError(DefectControlError):
    """The step-size formula has a vanishing denominator."""


class ConfigError(DefectControlError, ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
