"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Array dimensions do not line up."""


class DomainError(ValueError):
    """Input is outside the domain of the operation (non-finite, empty, ...)."""


class InsufficientDataError(RuntimeError):
    """Not enough stored samples to satisfy the request."""


class NotReadyError(RuntimeError):
    """The HVD estimate is not valid yet (buffer below the cut-in threshold)."""


class ConfigError(ValueError):
    """Invalid run or agent configuration."""
