"""Exception types shared across the package."""


class ThermoflatError(Exception):
    """Base class for all package errors."""


class DomainError(ThermoflatError, ValueError):
    """An input lies outside the mathematical or physical domain of an operation."""


class NumericError(ThermoflatError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class ConfigurationError(ThermoflatError, RuntimeError):
    """The requested precision mode or option combination is unavailable."""
