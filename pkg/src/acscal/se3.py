"""Rotation and rigid-transform arithmetic.

Conventions used across the package:

* Rotations are 3x3 row-major numpy arrays, kept orthonormal everywhere.
* Euler angles follow the Z-Y-X convention, ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``,
  stored in radians; degrees appear only at file/CLI boundaries.
* A :class:`Pose` maps points between frames via ``p_out = R @ p_in + t``,
  with translations in meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateMatrix, GimbalLock, NegativeDeterminant

FRAME_WORLD = "world"
FRAME_EGO = "ego-init"

_GIMBAL_TOL = 1e-8


class EulerAngles(NamedTuple):
    """Roll/pitch/yaw in radians (Z-Y-X convention)."""

    roll: float
    pitch: float
    yaw: float

    def degrees(self) -> "EulerAngles":
        return EulerAngles(*(math.degrees(a) for a in self))


@dataclass(frozen=True)
class Pose:
    """Rigid transform: ``p_out = rotation @ p_in + translation``.

    ``frame`` tags which reference frame the pose lives in ("world" or
    "ego-init"); it is informational and never checked by the arithmetic
    below -- frame compatibility is the caller's responsibility.
    """

    rotation: np.ndarray
    translation: np.ndarray
    frame: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        if self.rotation.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if self.translation.shape != (3,):
            raise ValueError("translation must be a 3-vector")

    @staticmethod
    def identity(frame: str | None = None) -> "Pose":
        return Pose(np.eye(3), np.zeros(3), frame)


@dataclass(frozen=True)
class ScaledRotationSplit:
    """Result of splitting a scaled rotation into rotation and scale.

    ``singular_values`` (sorted descending) are exposed so callers can judge
    how far the input was from an exact scaled rotation.
    """

    rotation: np.ndarray
    scale: float
    singular_values: np.ndarray


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_to_rotation(euler: EulerAngles) -> np.ndarray:
    """Build ``Rz(yaw) @ Ry(pitch) @ Rx(roll)`` from Euler angles in radians."""
    roll, pitch, yaw = euler
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def rotation_to_euler(rotation: np.ndarray) -> EulerAngles:
    """Extract Z-Y-X Euler angles, each in (-pi, pi].

    Raises:
        GimbalLock: when ``|cos(pitch)| < 1e-8``; the parameterization is
            singular there and callers must re-seed or re-parameterize.
    """
    r = np.asarray(rotation, dtype=float)
    cos_pitch = math.hypot(r[2, 1], r[2, 2])
    if cos_pitch < _GIMBAL_TOL:
        raise GimbalLock(f"pitch within {_GIMBAL_TOL} of +/-90 degrees")
    pitch = math.atan2(-r[2, 0], cos_pitch)
    roll = math.atan2(r[2, 1], r[2, 2])
    yaw = math.atan2(r[1, 0], r[0, 0])
    return EulerAngles(roll, pitch, yaw)


_GEN_X = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
_GEN_Y = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
_GEN_Z = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


def euler_rotation_and_partials(
    euler: EulerAngles,
) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Rotation matrix plus its partial derivatives w.r.t. roll, pitch, yaw.

    Used to build analytic Jacobians of the calibration residuals; the
    derivative of each axis rotation is its so(3) generator times itself.
    """
    roll, pitch, yaw = euler
    rx, ry, rz = rot_x(roll), rot_y(pitch), rot_z(yaw)
    rotation = rz @ ry @ rx
    d_roll = rz @ ry @ (_GEN_X @ rx)
    d_pitch = rz @ (_GEN_Y @ ry) @ rx
    d_yaw = _GEN_Z @ rz @ ry @ rx
    return rotation, (d_roll, d_pitch, d_yaw)


def is_rotation(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    """True when ``matrix`` is orthonormal with determinant +1 within tol."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        return False
    if np.max(np.abs(m @ m.T - np.eye(3))) > tol:
        return False
    return abs(np.linalg.det(m) - 1.0) <= tol


def geodesic_angle(rot_a: np.ndarray, rot_b: np.ndarray) -> float:
    """Rotation angle (radians) separating two rotations."""
    cos_angle = (np.trace(np.asarray(rot_a).T @ np.asarray(rot_b)) - 1.0) / 2.0
    return math.acos(min(1.0, max(-1.0, cos_angle)))


def compose(a: Pose, b: Pose) -> Pose:
    """Pose applying ``b`` first, then ``a``."""
    return Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation, a.frame)


def invert(a: Pose) -> Pose:
    rt = a.rotation.T
    return Pose(rt, -rt @ a.translation, a.frame)


def transform_point(a: Pose, point: np.ndarray) -> np.ndarray:
    return a.rotation @ np.asarray(point, dtype=float) + a.translation


def invert_relative_pose(rotation: np.ndarray, translation: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse form of a relative pose: ``(R^T, -R^T t)``."""
    rt = np.asarray(rotation, dtype=float).T
    return rt, -rt @ np.asarray(translation, dtype=float)


def orthonormalize_and_scale(matrix: np.ndarray) -> ScaledRotationSplit:
    """Split a (noisy) scaled rotation ``phi * R + N`` into rotation and scale.

    The rotation is the SVD projection ``U @ V^T`` and the scale is the mean
    of the singular values, which equals phi exactly when the noise term is
    zero and approximates it when the noise is small.

    Raises:
        DegenerateMatrix: smallest singular value < 1e-10 x largest.
        NegativeDeterminant: determinant <= 0 (a reflection; rejected rather
            than sign-flipped, since that indicates corrupt input, not noise).
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    u, singular_values, vt = np.linalg.svd(m)
    if singular_values[-1] < 1e-10 * singular_values[0]:
        raise DegenerateMatrix(
            f"singular values {singular_values} span more than 1e10: not a scaled rotation"
        )
    if np.linalg.det(m) <= 0.0:
        raise NegativeDeterminant("matrix has non-positive determinant")
    rotation = u @ vt
    scale = float(np.mean(singular_values))
    return ScaledRotationSplit(rotation=rotation, scale=scale, singular_values=singular_values)
