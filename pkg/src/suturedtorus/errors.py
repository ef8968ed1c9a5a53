"""Exception types raised across the package."""


class SuturedTorusError(Exception):
    """Base class for all package errors."""


class InvalidModel(SuturedTorusError, ValueError):
    pass


class PointOutsideCharts(SuturedTorusError, ValueError):
    pass


class NoFormulaInSmoothingChart(SuturedTorusError):
    """The 1-form has no closed-form expression in the smoothing chart."""


class DegenerateSaddle(SuturedTorusError):
    pass


class DegenerateAreaForm(SuturedTorusError):
    pass


class LeftChartDomain(SuturedTorusError):
    def __init__(self, message, exit_time=None):
        super().__init__(message)
        self.exit_time = exit_time


class StepFailure(SuturedTorusError):
    pass


class NewtonDivergence(SuturedTorusError):
    pass


class SingularNewtonMatrix(SuturedTorusError):
    pass


class NonpositiveDenominator(SuturedTorusError):
    pass


class ArcConstructionFailure(SuturedTorusError):
    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = tuple(failed)


class InconsistentIdentification(SuturedTorusError):
    pass


class OrbitCountMismatch(SuturedTorusError):
    pass


class ResonantRotation(SuturedTorusError, ValueError):
    pass


class DegenerateIterate(SuturedTorusError):
    pass


class FiltrationHypothesisViolated(SuturedTorusError):
    pass


class OracleMismatch(SuturedTorusError):
    pass


class ConfigError(SuturedTorusError, ValueError):
    """Configuration failed schema validation or names an unknown option."""
