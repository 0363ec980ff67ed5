"""Exception hierarchy shared by all calibration modules.

Every error carries a stable machine-readable ``category`` and a process
exit code used by the CLI, so callers/scripts can branch on failure kind
without parsing messages.
"""

from __future__ import annotations


class CalibrationError(Exception):
    """Base class for all errors raised by this package."""

    category = "calibration-error"
    exit_code = 20


class GimbalLock(CalibrationError):
    """Roll/pitch/yaw parameterization is singular (|cos pitch| ~ 0)."""

    category = "gimbal-lock"
    exit_code = 21


class DegenerateMatrix(CalibrationError):
    """Matrix is numerically singular; not a scaled rotation."""

    category = "degenerate-matrix"
    exit_code = 22


class NegativeDeterminant(CalibrationError):
    """Matrix determinant <= 0: a reflection, not a (scaled) rotation."""

    category = "negative-determinant"
    exit_code = 23


class Degenerate(CalibrationError):
    """Linear system is rank deficient: insufficient or too uniform motion."""

    category = "degenerate-motion"
    exit_code = 24


class LengthMismatch(CalibrationError):
    """Sequences are unequal, unaligned, or too short for the estimator."""

    category = "length-mismatch"
    exit_code = 25


class NonPositiveScale(CalibrationError):
    """A scale factor that must be positive is zero or negative."""

    category = "non-positive-scale"
    exit_code = 26


class NotCollinear(CalibrationError):
    """Joint position vectors expected to be parallel are not."""

    category = "not-collinear"
    exit_code = 27


class ParseError(CalibrationError):
    """Input file could not be parsed."""

    category = "parse-error"
    exit_code = 28

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidRotation(CalibrationError):
    """A loaded rotation matrix failed validation."""

    category = "invalid-rotation"
    exit_code = 29


class MixedFrames(CalibrationError):
    """A camera's pose records mix world and ego frame tags."""

    category = "mixed-frames"
    exit_code = 30
