"""Exception types shared across the solver and analysis modules."""

from __future__ import annotations


class DelayWaveError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DelayWaveError, ValueError):
    """Invalid parameter or configuration value (detected before any run)."""


class SingularFeedbackError(ConfigError):
    """Instantaneous feedback with mu = 1: the boundary closure is singular."""


class TraceStateError(DelayWaveError, RuntimeError):
    """A trace extension was applied in the wrong order or twice."""


class CoverageError(DelayWaveError, ValueError):
    """Evaluation requested outside the interval covered by a trace."""


class FitError(DelayWaveError, ValueError):
    """Rate fitting could not run on the given window (too few samples/peaks)."""
