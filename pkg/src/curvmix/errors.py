"""Exception hierarchy shared by every curvmix module.

Each class carries the process exit code the CLI reports for it.
"""

from __future__ import annotations


class CurvmixError(Exception):
    """Base class for all errors raised by curvmix."""

    exit_code: int = 1


class ArgumentError(CurvmixError, ValueError):
    """An operation was called with arguments outside its preconditions."""

    exit_code = 2


class SpectrumSizeError(ArgumentError):
    """A dense eigensolve was requested above the configured size cap."""


class NumericalError(CurvmixError, ArithmeticError):
    """A numerical procedure failed or produced an invalid result."""

    exit_code = 3


class NotPositiveDefiniteError(NumericalError):
    """A matrix expected to be positive definite failed to factor."""


class TailFitError(NumericalError):
    """The power-law tail model could not be fitted to the supplied values."""


class InvalidFactorError(NumericalError):
    """A mixing matrix has a non-positive diagonal entry."""


class TrainingDivergedError(NumericalError):
    """Private training produced a non-finite loss."""


class IdentityCheckError(NumericalError):
    """A simulated trajectory violated the closed-form error identity."""


class StreamExhaustedError(CurvmixError, RuntimeError):
    """A noise stream was asked for more steps than its mixing matrix has rows."""

    exit_code = 3


class ArtifactIOError(CurvmixError, OSError):
    """A file artifact could not be read, parsed, or written."""

    exit_code = 4


__all__ = [
    "ArgumentError",
    "ArtifactIOError",
    "CurvmixError",
    "IdentityCheckError",
    "InvalidFactorError",
    "NotPositiveDefiniteError",
    "NumericalError",
    "SpectrumSizeError",
    "StreamExhaustedError",
    "TailFitError",
    "TrainingDivergedError",
]
