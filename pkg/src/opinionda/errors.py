"""Exception types shared across the package."""


class OpinionDAError(Exception):
    """Base class for all package errors."""


class ValidationError(OpinionDAError, ValueError):
    """Input data or configuration violates a documented invariant."""


class NumericalError(OpinionDAError, ArithmeticError):
    """A computation is undefined or degenerate for the given inputs."""


class FilterDivergenceWarning(UserWarning):
    """Innovations are biased, a symptom of a misconfigured filter."""
