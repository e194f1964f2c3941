"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "LevySdeError",
    "DomainError",
    "IntegrabilityError",
    "EstimationError",
    "QuadratureError",
    "LevelExhaustionError",
    "NormalizationCapError",
    "NoiseSpecError",
    "RefinementError",
    "NoiseSharingError",
    "BlowUpError",
    "ConfigError",
]


class LevySdeError(Exception):
    """Base class for all package errors."""


class DomainError(LevySdeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class IntegrabilityError(LevySdeError):
    """A jump measure violates the integrability contract of its role."""


class EstimationError(LevySdeError):
    """A statistical estimator failed to converge; carries diagnostics."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class QuadratureError(LevySdeError):
    """Numerical integration failed to reach the requested tolerance."""


class LevelExhaustionError(LevySdeError):
    """The level recursion terminated early (convergent Osgood integral)."""

    def __init__(self, message: str, k: int):
        super().__init__(message)
        self.k = k


class NormalizationCapError(LevySdeError):
    """A test-function normalization exceeded its theoretical cap."""


class NoiseSpecError(LevySdeError):
    """A noise specification is inconsistent (e.g. infinite large-jump rate)."""


class RefinementError(LevySdeError):
    """Requested grid is not a refinement of the existing one."""


class NoiseSharingError(LevySdeError):
    """Two coupled simulations were not driven by the same noise realization."""


class BlowUpError(LevySdeError):
    """The simulated state left the finite range; carries the blow-up time."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class ConfigError(LevySdeError):
    """A run configuration file failed to parse or validate."""
