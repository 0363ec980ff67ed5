"""Motion sequences: ordered per-camera poses over time steps.

Ego-referenced sequences ("ego-init") express each pose relative to the
camera's own frame at step 0, which is therefore an implicit identity and
never stored. World-referenced sequences express every pose in one shared
external frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch
from .se3 import FRAME_EGO, FRAME_WORLD, Pose

_FRAMES = (FRAME_WORLD, FRAME_EGO)


@dataclass(frozen=True)
class MotionSequence:
    """Per-camera poses over strictly increasing step indices.

    ``rotations`` is (n, 3, 3), ``translations`` (n, 3); entry ``k`` belongs
    to ``steps[k]``. The pose at step i maps points into the camera frame
    (world sequences), or from the camera-at-step-i frame into the step-0
    frame (ego sequences).
    """

    camera_id: str
    frame: str
    steps: np.ndarray
    rotations: np.ndarray
    translations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "steps", np.asarray(self.steps, dtype=int))
        object.__setattr__(self, "rotations", np.asarray(self.rotations, dtype=float))
        object.__setattr__(self, "translations", np.asarray(self.translations, dtype=float))
        if self.frame not in _FRAMES:
            raise ValueError(f"frame must be one of {_FRAMES}, got {self.frame!r}")
        n = len(self.steps)
        if n < 1:
            raise ValueError("a motion sequence needs at least one pose")
        if self.rotations.shape != (n, 3, 3) or self.translations.shape != (n, 3):
            raise ValueError("rotations/translations shapes do not match step count")
        if np.any(np.diff(self.steps) <= 0):
            raise ValueError("step indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.steps)

    def pose(self, index: int) -> Pose:
        return Pose(self.rotations[index], self.translations[index], self.frame)


def require_aligned(seq_a: MotionSequence, seq_b: MotionSequence, min_length: int = 2) -> None:
    """Check two sequences share frame tag and step indices; raise otherwise."""
    if seq_a.frame != seq_b.frame:
        raise LengthMismatch(
            f"frame mismatch: {seq_a.camera_id}={seq_a.frame}, {seq_b.camera_id}={seq_b.frame}"
        )
    if len(seq_a) != len(seq_b) or np.any(seq_a.steps != seq_b.steps):
        raise LengthMismatch("sequences have unequal or unaligned step indices")
    if len(seq_a) < min_length:
        raise LengthMismatch(f"need at least {min_length} poses, got {len(seq_a)}")


def rebase(seq: MotionSequence, reference_step: int) -> tuple[MotionSequence, Pose]:
    """Re-express an ego sequence relative to one of its own images.

    Returns the re-based sequence plus the pose of the new reference in the
    old frame, so estimates made in the new frame can be mapped back.
    The old step 0 (implicit identity) becomes a stored pose; the reference
    step itself is dropped, being the new implicit identity.
    """
    if seq.frame != FRAME_EGO:
        raise ValueError("only ego-referenced sequences can be re-based")
    if reference_step == 0:
        return seq, Pose.identity(FRAME_EGO)

    matches = np.nonzero(seq.steps == reference_step)[0]
    if len(matches) != 1:
        raise ValueError(f"reference step {reference_step} not in sequence")
    k = int(matches[0])
    r_ref, t_ref = seq.rotations[k], seq.translations[k]
    rt = r_ref.T

    steps = [0, *(int(s) for s in seq.steps if s != reference_step)]
    rotations = np.concatenate([np.eye(3)[None], np.delete(seq.rotations, k, axis=0)])
    translations = np.concatenate([np.zeros((1, 3)), np.delete(seq.translations, k, axis=0)])
    # (H^ref)^-1 H^i for every kept pose, including the old identity at step 0
    new_rot = np.einsum("ij,njk->nik", rt, rotations)
    new_trans = (translations - t_ref) @ rt.T

    rebased = MotionSequence(
        camera_id=seq.camera_id,
        frame=FRAME_EGO,
        steps=np.asarray(steps),
        rotations=new_rot,
        translations=new_trans,
    )
    return rebased, Pose(r_ref, t_ref, FRAME_EGO)
