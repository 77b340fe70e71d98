"""Exception hierarchy.

Errors split into two families so the command line can map them onto exit
codes: ``ConfigError`` subclasses are problems with the request (bad
hyperparameters, failed assumptions, unusable knobs) and everything else is
a numerical or runtime failure.
"""

from __future__ import annotations


class BvmError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(BvmError):
    """The request itself is invalid; maps to exit code 2."""


class HyperparameterOutOfRange(ConfigError):
    pass


class AssumptionFailure(ConfigError):
    """A standing assumption of the requested theorem does not hold."""

    def __init__(self, message: str, flags: dict | None = None):
        super().__init__(message)
        self.flags = dict(flags or {})


class SmoothnessViolation(ConfigError):
    pass


class PreconditionFail(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class ShapeTooSmall(ConfigError):
    pass


class AssignmentOverflow(ConfigError):
    pass


class EmptyData(ConfigError):
    pass


class ObservationOutOfSupport(ConfigError):
    pass


class NonConvergence(BvmError):
    def __init__(self, message: str, iterations: int = 0, last_residual: float = float("nan")):
        super().__init__(f"{message} (iterations={iterations}, residual={last_residual:.3e})")
        self.iterations = iterations
        self.last_residual = last_residual


class NotPositiveDefinite(BvmError):
    def __init__(self, message: str, lambda_min: float):
        super().__init__(f"{message} (lambda_min={lambda_min:.6g})")
        self.lambda_min = lambda_min


class HessianNotPD(NotPositiveDefinite):
    pass


class LeftSupport(BvmError):
    pass


class EmptyRegion(BvmError):
    pass


class NonFinite(BvmError):
    pass


class WindowTooSmall(BvmError):
    pass
