"""Calibration when each camera's ego-translations carry an unknown scale.

Structure-from-motion recovers translations only up to a per-camera factor
(mu_a, mu_b). Feeding such scaled sequences, plus the joint position
estimated from the same scaled data, through the linear relative-pose stage
yields a 3x3 block equal to phi * R with phi = mu_b / mu_a: the relative
scale is recoverable with no metric reference at all. The SVD split
separates phi from R, and a final Levenberg-Marquardt jointly polishes
(roll, pitch, yaw, scaled translation, phi), with phi parameterized as
exp(lambda) to stay positive.

Absolute scales need one metric anchor: a joint position measured at known
scale turns mu_a into a norm ratio and mu_b into mu_a * phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NonPositiveScale, NotCollinear
from .lm import LmSettings, minimize_least_squares
from .relpose import linear_relpose_init
from .se3 import (
    EulerAngles,
    euler_rotation_and_partials,
    invert_relative_pose,
    orthonormalize_and_scale,
    rotation_to_euler,
)
from .sequences import MotionSequence

_COLLINEARITY_TOL_DEG = 1.0


@dataclass(frozen=True)
class ScaledCalibration:
    """Relative pose and scale factors of a scale-ambiguous rig.

    ``t_ba_hat`` and ``o_a_hat`` remain in the scaled units they were
    estimated in (factors mu_b and mu_a respectively). ``mu_a``/``mu_b`` and
    the metric ``t_ba`` are filled only by :func:`recover_absolute_scales`.
    """

    r_ba: np.ndarray
    phi_ba: float
    t_ba_hat: np.ndarray
    o_a_hat: np.ndarray
    euler: EulerAngles
    residual_rms: float
    iterations: int
    converged: bool
    cost_history: tuple[float, ...]
    mu_a: float | None = None
    mu_b: float | None = None
    t_ba: np.ndarray | None = None

    def metric_relative_pose_inv(self) -> tuple[np.ndarray, np.ndarray]:
        """Inverse form (R_ab, t_ab) of the metric pose; needs scales set."""
        if self.t_ba is None:
            raise NonPositiveScale("absolute scales not recovered yet")
        return invert_relative_pose(self.r_ba, self.t_ba)


def _scaled_residual_fn(
    seq_a: MotionSequence, seq_b: MotionSequence, r0: np.ndarray, o_a_hat: np.ndarray, refine_joint: bool
):
    """Residual/Jacobian over x = [rpy delta, t_hat, log phi (, o_hat)]."""
    rot_a, t_a = seq_a.rotations, seq_a.translations
    rot_b, t_b = seq_b.rotations, seq_b.translations
    n = len(seq_a)
    n_params = 10 if refine_joint else 7
    jac_t = rot_b - np.eye(3)

    def fun(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        delta, t = EulerAngles(*x[:3]), x[3:6]
        phi = math.exp(x[6])
        o = x[7:10] if refine_joint else o_a_hat
        e, de = euler_rotation_and_partials(delta)
        m = e @ r0
        carried = np.einsum("nij,j->ni", rot_a, o) + t_a
        # bracket multiplied by phi in the residual; also d(residual)/d(phi)
        bracket = np.einsum("nij,j->ni", rot_b, m @ o) - carried @ m.T
        residual = phi * bracket + np.einsum("nij,j->ni", rot_b, t) - t + t_b

        jac = np.empty((n, 3, n_params))
        for k in range(3):
            dk = de[k] @ r0
            jac[:, :, k] = phi * (np.einsum("nij,j->ni", rot_b, dk @ o) - carried @ dk.T)
        jac[:, :, 3:6] = jac_t
        jac[:, :, 6] = phi * bracket  # chain rule through phi = exp(lambda)
        if refine_joint:
            jac[:, :, 7:10] = phi * (
                np.einsum("nij,jk->nik", rot_b, m) - np.einsum("ij,njk->nik", m, rot_a)
            )
        return residual.reshape(-1), jac.reshape(-1, n_params)

    return fun


def calibrate_scaled(
    seq_a_hat: MotionSequence,
    seq_b_hat: MotionSequence,
    o_a_hat: np.ndarray,
    settings: LmSettings | None = None,
    refine_joint: bool = False,
) -> ScaledCalibration:
    """Recover R, phi and the scaled translation from scale-ambiguous motion.

    ``o_a_hat`` must come from the same scaled A-sequence (it carries mu_a).
    By default it is held fixed during refinement: refining it together with
    phi opens a scale gauge along the joint direction. Pass
    ``refine_joint=True`` to include it anyway, for fidelity experiments.
    """
    settings = settings or LmSettings()
    o_a_hat = np.asarray(o_a_hat, dtype=float)

    block, t_init = linear_relpose_init(seq_a_hat, seq_b_hat, o_a_hat)
    if np.linalg.det(block) <= 0.0:
        raise NonPositiveScale(
            "linear stage produced a non-positive-determinant block; "
            "scale split would be invalid"
        )
    split = orthonormalize_and_scale(block)
    r0, phi0 = split.rotation, split.scale

    fun = _scaled_residual_fn(seq_a_hat, seq_b_hat, r0, o_a_hat, refine_joint)
    x0 = np.concatenate([np.zeros(3), t_init, [math.log(phi0)]])
    if refine_joint:
        x0 = np.concatenate([x0, o_a_hat])
    result = minimize_least_squares(fun, x0, settings)

    delta = EulerAngles(*result.x[:3])
    r_ba = euler_rotation_and_partials(delta)[0] @ r0
    n_residuals = 3 * len(seq_a_hat)
    return ScaledCalibration(
        r_ba=r_ba,
        phi_ba=float(math.exp(result.x[6])),
        t_ba_hat=result.x[3:6],
        o_a_hat=result.x[7:10] if refine_joint else o_a_hat,
        euler=rotation_to_euler(r_ba),
        residual_rms=float(np.sqrt(result.cost / n_residuals)),
        iterations=result.iterations,
        converged=result.converged,
        cost_history=tuple(result.cost_history),
    )


def recover_absolute_scales(calib: ScaledCalibration, o_a_metric: np.ndarray) -> ScaledCalibration:
    """Anchor the calibration to metric units via a known-scale joint.

    The scaled and metric joint positions are parallel by construction, so
    mu_a is their norm ratio; a misalignment beyond 1 degree means the two
    joint estimates do not describe the same rig. mu_b follows from the
    definition of the relative scale, phi = mu_b / mu_a.
    """
    o_a_metric = np.asarray(o_a_metric, dtype=float)
    metric_norm = float(np.linalg.norm(o_a_metric))
    hat_norm = float(np.linalg.norm(calib.o_a_hat))
    if metric_norm <= 0.0 or hat_norm <= 0.0:
        raise NotCollinear("joint positions must be nonzero to compare scales")

    cos_angle = float(np.dot(calib.o_a_hat, o_a_metric) / (hat_norm * metric_norm))
    angle_deg = math.degrees(math.acos(min(1.0, max(-1.0, cos_angle))))
    if angle_deg > _COLLINEARITY_TOL_DEG:
        raise NotCollinear(
            f"scaled and metric joint positions differ by {angle_deg:.3f} degrees"
        )

    mu_a = hat_norm / metric_norm
    mu_b = mu_a * calib.phi_ba
    return replace(calib, mu_a=mu_a, mu_b=mu_b, t_ba=calib.t_ba_hat / mu_b)
