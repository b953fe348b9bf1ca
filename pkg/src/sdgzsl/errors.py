"""Exception types raised by the public API."""


class GzslError(Exception):
    """Base class for every error this package raises on purpose."""


class ShapeError(GzslError):
    """Operands have incompatible or invalid dimensions."""


class DomainError(GzslError):
    """A value is outside the mathematical domain of an operation."""


class ValidationError(GzslError):
    """A config or spec object violates one of its declared bounds."""


class DatasetLoadError(GzslError):
    """A dataset directory is missing, malformed, or corrupt."""


class CalibrationError(GzslError):
    """Threshold calibration received unusable input."""


class DivergenceError(GzslError):
    """Training produced a non-finite loss."""


class ConfigError(GzslError):
    """An unknown strategy tag or inconsistent run configuration."""


class MetricError(GzslError):
    """A metric was asked to score an empty or inconsistent class."""


class EvaluationError(GzslError):
    """The evaluation harness received an unusable dataset split."""
