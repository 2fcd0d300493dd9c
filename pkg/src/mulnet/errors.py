"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


class ConfigError(ValueError):
    """Invalid configuration or arguments."""


class DivergedError(ArithmeticError):
    """A computation produced non-finite values; the owning trial is diverged."""


class NumericOverflowError(DivergedError):
    """Input lies outside the range where a kernel stays finite."""


class UndefinedMetricError(ValueError):
    """Metric is undefined for the given inputs (e.g. a zero reference value)."""


class UnknownActivationError(KeyError):
    """No activation registered under the requested name."""
