"""Exception hierarchy shared by every weakgrad module."""

from __future__ import annotations


class WeakGradError(Exception):
    """Base class for all library errors."""


class ParameterError(WeakGradError, ValueError):
    """A distribution, estimator or stream parameter is out of range."""


class DomainError(WeakGradError, ValueError):
    """A point lies outside the support where an operation is defined."""


class SupportViolationError(DomainError):
    """Nominal density vanishes where a likelihood-ratio weight is needed."""


class ShapeError(WeakGradError, ValueError):
    """An input vector does not match the model's dimensions."""


class InputIndexError(WeakGradError, IndexError):
    """A coordinate index is out of range or not sensitive."""


class DecompositionUnavailableError(WeakGradError, NotImplementedError):
    """The family has no weak-derivative decomposition."""


class InsufficientDataError(WeakGradError, ValueError):
    """Too few samples to form an estimate."""


class ComparisonError(WeakGradError, ValueError):
    """Two reports do not describe the same model configuration."""


class UnsupportedCombinationError(WeakGradError, ValueError):
    """The requested estimator cannot run on the requested model."""


class ConfigError(WeakGradError, ValueError):
    """An experiment configuration field is invalid."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
