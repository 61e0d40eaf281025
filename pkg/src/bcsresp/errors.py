"""Typed failure and outcome signals shared across the package."""

from __future__ import annotations


class BcsRespError(Exception):
    """Base class for all package errors."""


class NonConvergedQuadrature(BcsRespError):
    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SingularIntegrand(BcsRespError):
    pass


class BracketFailure(BcsRespError):
    pass


class PoleProximity(BcsRespError):
    pass


class PolePinching(BcsRespError):
    pass


class CollectiveModePole(BcsRespError):
    """Raised when the fluctuation determinant is too small to divide by.

    This marks a point on the collective-mode dispersion rather than a
    numerical breakdown; ``magnitude`` carries |D|.
    """

    def __init__(self, magnitude: float, threshold: float):
        super().__init__(f"|D| = {magnitude:.3e} below threshold {threshold:.3e}")
        self.magnitude = magnitude
        self.threshold = threshold


class NoRootBelowContinuum(BcsRespError):
    pass


class ConfigError(BcsRespError):
    pass


class TruncationWarning(UserWarning):
    pass
