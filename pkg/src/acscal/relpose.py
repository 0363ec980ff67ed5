"""Relative pose between the two cameras of a non-overlapping rig.

With the joint position O_a known, every step of general ego motion ties the
unknown relative pose (R, t) between the camera init frames through

    R_b^i R O_a + R_b^i t - R R_a^i O_a - R t_a^i + t_b^i - t = 0.

A first estimate treats that as linear in the 12 entries of (R, t); the
3x3 block is then projected onto SO(3) and the result polished by
Levenberg-Marquardt over (roll, pitch, yaw, t, O_a). The Euler angles
parameterize a delta rotation composed onto the linear-init rotation, so the
optimization stays away from the gimbal singularity regardless of the
absolute orientation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Degenerate, LengthMismatch
from .lm import LmResult, LmSettings, minimize_least_squares
from .se3 import (
    FRAME_EGO,
    EulerAngles,
    Pose,
    compose,
    euler_rotation_and_partials,
    invert,
    invert_relative_pose,
    orthonormalize_and_scale,
    rotation_to_euler,
    transform_point,
)
from .sequences import MotionSequence, require_aligned

_INIT_RANK_RTOL = 1e-8
_JOINT_DRIFT_LIMIT = 0.2


@dataclass(frozen=True)
class RelativePoseEstimate:
    """Calibrated relative pose, its inverse form, and refinement diagnostics.

    ``r_ba``/``t_ba`` map points from the A-init frame to the B-init frame;
    ``r_ab``/``t_ab`` is the inverse form. ``o_a`` is the jointly refined
    joint position; ``joint_drift_flagged`` is set when it moved more than
    20% in norm from its seed, a sign the joint parameter absorbed pose error.
    """

    r_ba: np.ndarray
    t_ba: np.ndarray
    euler: EulerAngles
    r_ab: np.ndarray
    t_ab: np.ndarray
    o_a: np.ndarray
    residual_rms: float
    residual_rms_init: float
    iterations: int
    converged: bool
    joint_drift_flagged: bool
    cost_history: tuple[float, ...]


@dataclass(frozen=True)
class TrajectoryPoint:
    """Both camera poses at one step, expressed in the A-init frame."""

    step: int
    pose_a: Pose
    pose_b: Pose
    joint_from_a: np.ndarray
    joint_from_b: np.ndarray
    joint_gap: float


def _vec_operator(v: np.ndarray) -> np.ndarray:
    """3x9 matrix K with K @ vec(R) == R @ v for row-major vec(R)."""
    k = np.zeros((3, 9))
    for j in range(3):
        k[j, 3 * j : 3 * j + 3] = v
    return k


def linear_relpose_init(
    seq_a: MotionSequence, seq_b: MotionSequence, o_a: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the relative-pose constraint as if linear in 12 unknowns.

    Returns the unconstrained 3x3 block (not yet orthonormal) and the
    translation. Raises ``Degenerate`` when the stacked system has rank < 12
    at relative tolerance 1e-8, i.e. the motions are too uniform.
    """
    if seq_a.frame != FRAME_EGO or seq_b.frame != FRAME_EGO:
        raise LengthMismatch("relative-pose estimation needs ego-referenced sequences")
    require_aligned(seq_a, seq_b)
    o_a = np.asarray(o_a, dtype=float)

    n = len(seq_a)
    rot_b = seq_b.rotations
    # coefficient of vec(R): R_b^i K(o_a) - K(R_a^i o_a + t_a^i)
    k_oa = _vec_operator(o_a)
    carried = np.einsum("nij,j->ni", seq_a.rotations, o_a) + seq_a.translations
    k_carried = np.zeros((n, 3, 9))
    for j in range(3):
        k_carried[:, j, 3 * j : 3 * j + 3] = carried
    block_rot = np.einsum("nij,jk->nik", rot_b, k_oa) - k_carried
    block_t = rot_b - np.eye(3)
    design = np.concatenate([block_rot, block_t], axis=2).reshape(-1, 12)
    rhs = -seq_b.translations.reshape(-1)

    singular_values = np.linalg.svd(design, compute_uv=False)
    rank = int(np.sum(singular_values > _INIT_RANK_RTOL * singular_values[0]))
    if rank < 12:
        raise Degenerate(f"relative-pose system rank {rank} < 12: motions too uniform")

    solution, _, _, _ = np.linalg.lstsq(design, rhs, rcond=None)
    return solution[:9].reshape(3, 3), solution[9:]


def _relpose_residual_fn(seq_a: MotionSequence, seq_b: MotionSequence, r0: np.ndarray):
    """Residual/Jacobian of the refinement over x = [rpy delta, t, o_a]."""
    rot_a, t_a = seq_a.rotations, seq_a.translations
    rot_b, t_b = seq_b.rotations, seq_b.translations
    n = len(seq_a)
    jac_t = (rot_b - np.eye(3)).reshape(-1, 3)

    def fun(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        delta, t, o = EulerAngles(*x[:3]), x[3:6], x[6:9]
        e, de = euler_rotation_and_partials(delta)
        m = e @ r0
        carried = np.einsum("nij,j->ni", rot_a, o) + t_a
        residual = (
            np.einsum("nij,j->ni", rot_b, m @ o)
            - carried @ m.T
            + np.einsum("nij,j->ni", rot_b, t)
            - t
            + t_b
        )
        jac = np.empty((n, 3, 9))
        for k in range(3):
            dk = de[k] @ r0
            jac[:, :, k] = np.einsum("nij,j->ni", rot_b, dk @ o) - carried @ dk.T
        jac[:, :, 3:6] = jac_t.reshape(n, 3, 3)
        jac[:, :, 6:9] = np.einsum("nij,jk->nik", rot_b, m) - np.einsum("ij,njk->nik", m, rot_a)
        return residual.reshape(-1), jac.reshape(-1, 9)

    return fun


def refine_relpose_lm(
    init: tuple[np.ndarray, np.ndarray],
    seq_a: MotionSequence,
    seq_b: MotionSequence,
    o_a: np.ndarray,
    settings: LmSettings | None = None,
) -> RelativePoseEstimate:
    """Polish an orthonormalized linear init by Levenberg-Marquardt.

    The joint position is refined together with the pose (it enters the
    residual), seeded from the caller's estimate and flagged if it drifts
    more than 20% in norm from that seed.
    """
    settings = settings or LmSettings()
    r0, t0 = np.asarray(init[0], dtype=float), np.asarray(init[1], dtype=float)
    o_seed = np.asarray(o_a, dtype=float)

    fun = _relpose_residual_fn(seq_a, seq_b, r0)
    x0 = np.concatenate([np.zeros(3), t0, o_seed])
    result = minimize_least_squares(fun, x0, settings)
    return _build_estimate(result, r0, o_seed, 3 * len(seq_a))


def _build_estimate(
    result: LmResult, r0: np.ndarray, o_seed: np.ndarray, n_residuals: int
) -> RelativePoseEstimate:
    delta, t, o = EulerAngles(*result.x[:3]), result.x[3:6], result.x[6:9]
    r_ba = euler_rotation_and_partials(delta)[0] @ r0
    r_ab, t_ab = invert_relative_pose(r_ba, t)
    seed_norm = np.linalg.norm(o_seed)
    drift = np.linalg.norm(o - o_seed) / seed_norm if seed_norm > 0 else 0.0
    return RelativePoseEstimate(
        r_ba=r_ba,
        t_ba=t,
        euler=rotation_to_euler(r_ba),
        r_ab=r_ab,
        t_ab=t_ab,
        o_a=o,
        residual_rms=float(np.sqrt(result.cost / n_residuals)),
        residual_rms_init=float(np.sqrt(result.cost_history[0] / n_residuals)),
        iterations=result.iterations,
        converged=result.converged,
        joint_drift_flagged=bool(drift > _JOINT_DRIFT_LIMIT),
        cost_history=tuple(result.cost_history),
    )


def calibrate_relative_pose(
    seq_a: MotionSequence,
    seq_b: MotionSequence,
    o_a: np.ndarray,
    settings: LmSettings | None = None,
) -> RelativePoseEstimate:
    """Full pipeline: linear init, SO(3) projection, LM refinement."""
    block, t_init = linear_relpose_init(seq_a, seq_b, o_a)
    r_init = orthonormalize_and_scale(block).rotation
    return refine_relpose_lm((r_init, t_init), seq_a, seq_b, o_a, settings)


def recover_trajectory(
    calib: RelativePoseEstimate, seq_a: MotionSequence, seq_b: MotionSequence
) -> list[TrajectoryPoint]:
    """Express both cameras' trajectories in the A-init frame.

    Camera A's pose at step i is its ego pose; camera B's is conjugated
    through the calibrated relative pose. Each point also carries the joint
    position computed independently from each side -- for consistent data
    the two must coincide, so the gap between them is a per-step residual.
    """
    require_aligned(seq_a, seq_b, min_length=1)
    if seq_a.frame != FRAME_EGO:
        raise LengthMismatch("trajectory recovery needs ego-referenced sequences")

    h_ba = Pose(calib.r_ba, calib.t_ba, FRAME_EGO)
    h_ab = invert(h_ba)
    o_b = transform_point(h_ba, calib.o_a)

    entries: list[tuple[int, Pose, Pose]] = []
    if seq_a.steps[0] != 0:
        entries.append((0, Pose.identity(FRAME_EGO), Pose.identity(FRAME_EGO)))
    entries.extend(
        (int(seq_a.steps[i]), seq_a.pose(i), seq_b.pose(i)) for i in range(len(seq_a))
    )

    points = []
    for step, pose_a, pose_b_ego in entries:
        pose_b = compose(h_ab, pose_b_ego)
        joint_a = transform_point(pose_a, calib.o_a)
        joint_b = transform_point(pose_b, o_b)
        points.append(
            TrajectoryPoint(
                step=step,
                pose_a=pose_a,
                pose_b=pose_b,
                joint_from_a=joint_a,
                joint_from_b=joint_b,
                joint_gap=float(np.linalg.norm(joint_a - joint_b)),
            )
        )
    return points
