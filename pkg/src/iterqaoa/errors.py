"""Shared exception types."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class ResourceLimitError(RuntimeError):
    """The request would exceed the simulator's size limits."""


class DegenerateInputError(ValueError):
    """The input is structurally valid but leaves nothing to operate on."""


class UndefinedMetricError(ValueError):
    """The metric is undefined for this input (e.g. zero denominator)."""
