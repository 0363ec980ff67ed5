"""Joint-position estimation from camera motion.

Two routes to the articulation point:

* overlapping views -- both cameras posed in a shared world frame; the joint
  coordinates in both camera frames satisfy, at every step i,
  ``R_a^i^T O_a - R_b^i^T O_b = R_a^i^T t_a^i - R_b^i^T t_b^i``
  (the joint's world position computed from either camera must agree), giving
  a 3n x 6 linear system in the stacked joint coordinates.

* fixed-joint ego motion -- the joint is held at one spatial location while
  the camera rotates about it, so ``(R^i - I) O = -t^i`` for every step,
  giving a 3n x 3 system per camera.

Both are solved by SVD least squares; rank deficiency means the motion does
not pin the joint down (e.g. every rotation shares one axis) and is reported
rather than silently producing one point of a whole solution line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Degenerate, LengthMismatch
from .se3 import FRAME_EGO, FRAME_WORLD
from .sequences import MotionSequence, require_aligned

_RANK_RTOL = 1e-8

VERDICT_UNIQUE = "unique"
VERDICT_ROTATIONAL_AXIS = "rotational_axis"
VERDICT_UNDERDETERMINED = "underdetermined"


@dataclass(frozen=True)
class JointEstimate:
    """Recovered joint coordinates plus solve diagnostics.

    ``o_a`` is the joint in the first camera's frame, ``o_b`` (when present)
    in the second camera's. ``min_singular_value`` and ``condition_number``
    describe the stacked design matrix actually solved.
    """

    o_a: np.ndarray
    o_b: np.ndarray | None
    residual_rms: float
    min_singular_value: float
    condition_number: float
    cameras: tuple[str, ...]


@dataclass(frozen=True)
class DegeneracyReport:
    """Rank diagnosis of the joint-estimation system.

    ``null_space_basis`` holds one unit vector per missing rank; a single
    null direction means the solution set is a line, the signature of motion
    about one shared rotational axis.
    """

    rank_estimate: int
    null_space_basis: np.ndarray
    verdict: str


def _fixed_joint_system(seq: MotionSequence) -> tuple[np.ndarray, np.ndarray]:
    design = (seq.rotations - np.eye(3)).reshape(-1, 3)
    rhs = -seq.translations.reshape(-1)
    return design, rhs


def _overlapping_system(seq_a: MotionSequence, seq_b: MotionSequence) -> tuple[np.ndarray, np.ndarray]:
    rt_a = np.transpose(seq_a.rotations, (0, 2, 1))
    rt_b = np.transpose(seq_b.rotations, (0, 2, 1))
    design = np.concatenate([rt_a, -rt_b], axis=2).reshape(-1, 6)
    rhs = (
        np.einsum("nij,nj->ni", rt_a, seq_a.translations)
        - np.einsum("nij,nj->ni", rt_b, seq_b.translations)
    ).reshape(-1)
    return design, rhs


def _rank_and_null(matrix: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    """Rank at relative tolerance 1e-8, null-space basis, singular values."""
    _, singular_values, vt = np.linalg.svd(matrix)
    if singular_values[0] == 0.0:
        return 0, vt, singular_values
    rank = int(np.sum(singular_values > _RANK_RTOL * singular_values[0]))
    return rank, vt[rank:], singular_values


def _solve(design: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float, float, float]:
    solution, _, _, singular_values = np.linalg.lstsq(design, rhs, rcond=None)
    residual = design @ solution - rhs
    residual_rms = float(np.sqrt(np.mean(residual**2)))
    min_sv = float(singular_values[-1])
    cond = float(singular_values[0] / singular_values[-1]) if min_sv > 0 else float("inf")
    return solution, residual_rms, min_sv, cond


def estimate_joint_overlapping(seq_a: MotionSequence, seq_b: MotionSequence) -> JointEstimate:
    """Estimate the joint in both camera frames from world-referenced poses.

    Solves the stacked 3n x 6 system for ``[O_a; O_b]`` (minimum-norm SVD
    least squares). Raises ``Degenerate`` when the 6x6 normal system is rank
    deficient, i.e. the relative motion between the cameras is insufficient.
    """
    if seq_a.frame != FRAME_WORLD or seq_b.frame != FRAME_WORLD:
        raise LengthMismatch("overlapping-view estimation needs world-referenced sequences")
    require_aligned(seq_a, seq_b)

    design, rhs = _overlapping_system(seq_a, seq_b)
    rank, _, _ = _rank_and_null(design.T @ design)
    if rank < 6:
        raise Degenerate(f"joint system rank {rank} < 6: insufficient relative motion")

    solution, residual_rms, min_sv, cond = _solve(design, rhs)
    return JointEstimate(
        o_a=solution[:3],
        o_b=solution[3:],
        residual_rms=residual_rms,
        min_singular_value=min_sv,
        condition_number=cond,
        cameras=(seq_a.camera_id, seq_b.camera_id),
    )


def estimate_joint_fixed(seq: MotionSequence) -> JointEstimate:
    """Estimate the joint from ego motion performed about a fixed point.

    Solves ``(R^i - I) O = -t^i`` stacked over all steps. Raises
    ``Degenerate`` when the stacked matrix has rank < 3, which per the
    uniqueness argument means the motions share a rotational axis or are
    pure translations.
    """
    if seq.frame != FRAME_EGO:
        raise LengthMismatch("fixed-joint estimation needs an ego-referenced sequence")
    if len(seq) < 2:
        raise LengthMismatch(f"need at least 2 poses, got {len(seq)}")

    design, rhs = _fixed_joint_system(seq)
    rank, _, _ = _rank_and_null(design)
    if rank < 3:
        raise Degenerate(
            f"fixed-joint system rank {rank} < 3: motions share a rotational axis "
            "or are pure translations"
        )

    solution, residual_rms, min_sv, cond = _solve(design, rhs)
    return JointEstimate(
        o_a=solution,
        o_b=None,
        residual_rms=residual_rms,
        min_singular_value=min_sv,
        condition_number=cond,
        cameras=(seq.camera_id,),
    )


def estimate_joint_fixed_pair(seq_a: MotionSequence, seq_b: MotionSequence) -> JointEstimate:
    """Run fixed-joint estimation per camera and merge into one estimate."""
    est_a = estimate_joint_fixed(seq_a)
    est_b = estimate_joint_fixed(seq_b)
    n_a, n_b = 3 * len(seq_a), 3 * len(seq_b)
    rms = float(
        np.sqrt((n_a * est_a.residual_rms**2 + n_b * est_b.residual_rms**2) / (n_a + n_b))
    )
    return JointEstimate(
        o_a=est_a.o_a,
        o_b=est_b.o_a,
        residual_rms=rms,
        min_singular_value=min(est_a.min_singular_value, est_b.min_singular_value),
        condition_number=max(est_a.condition_number, est_b.condition_number),
        cameras=(seq_a.camera_id, seq_b.camera_id),
    )


def check_degeneracy(
    arg: MotionSequence | tuple[MotionSequence, MotionSequence],
) -> DegeneracyReport:
    """Diagnose whether the joint system pins down a unique solution.

    Accepts an ego sequence (fixed-joint route) or a pair of world-referenced
    sequences (overlapping route). Uses the same matrices and the same 1e-8
    relative singular-value tolerance as the corresponding estimator, so
    ``verdict == "unique"`` exactly when the estimator would not raise.
    """
    if isinstance(arg, MotionSequence):
        design, _ = _fixed_joint_system(arg)
        full_rank = 3
        rank, null_basis, _ = _rank_and_null(design)
    else:
        seq_a, seq_b = arg
        require_aligned(seq_a, seq_b, min_length=1)
        design, _ = _overlapping_system(seq_a, seq_b)
        full_rank = 6
        rank, null_basis, _ = _rank_and_null(design.T @ design)

    null_dim = full_rank - rank
    if null_dim == 0:
        verdict = VERDICT_UNIQUE
    elif null_dim == 1:
        verdict = VERDICT_ROTATIONAL_AXIS
    else:
        verdict = VERDICT_UNDERDETERMINED
    return DegeneracyReport(rank_estimate=rank, null_space_basis=null_basis, verdict=verdict)
