"""Deterministic skeleton fixtures for the remix tests.

The dialogue fixture stages three people: two talking in the foreground
and one walking toward the background, the scenario the remix editor is
built around. Poses are synthesized from the canonical standing figure so
every joint is hand-placeable and assertions can know ground truth.
"""
from __future__ import annotations

import math

from previz.pose_overlay import JOINT_NAMES
from previz.skeleton import PersonPose, SkeletonFrame, SkeletonSequence

_STAND = {
    "nose": (0.0, -0.330), "neck": (0.0, -0.250),
    "right_shoulder": (-0.060, -0.240), "right_elbow": (-0.080, -0.130), "right_wrist": (-0.090, -0.030),
    "left_shoulder": (0.060, -0.240), "left_elbow": (0.080, -0.130), "left_wrist": (0.090, -0.030),
    "right_hip": (-0.035, 0.0), "right_knee": (-0.035, 0.140), "right_ankle": (-0.035, 0.280),
    "left_hip": (0.035, 0.0), "left_knee": (0.035, 0.140), "left_ankle": (0.035, 0.280),
    "right_eye": (-0.020, -0.350), "left_eye": (0.020, -0.350),
    "right_ear": (-0.040, -0.335), "left_ear": (0.040, -0.335),
}


def standing_pose(person_id: int, root_x: float, root_y: float, scale: float = 1.0,
                  sway: float = 0.0, confidence: float = 1.0) -> PersonPose:
    joints = []
    for name in JOINT_NAMES:
        dx, dy = _STAND[name]
        x = root_x + scale * dx + (sway if "wrist" in name else 0.0)
        y = root_y + scale * dy
        joints.append((min(1.0, max(0.0, x)), min(1.0, max(0.0, y)), confidence))
    return PersonPose(person_id=person_id, joints=tuple(joints))


def dialogue_sequence(fps: float = 16.0, n_frames: int = 32) -> SkeletonSequence:
    """Persons 0 and 1 converse; person 2 walks back and shrinks."""
    frames = []
    for k in range(n_frames):
        u = k / max(1, n_frames - 1)
        sway = 0.02 * math.sin(2 * math.pi * u * 2)
        p0 = standing_pose(0, 0.30, 0.58, scale=0.9, sway=sway)
        p1 = standing_pose(1, 0.70, 0.58, scale=0.9, sway=-sway)
        p2 = standing_pose(2, 0.50 + 0.10 * u, 0.52 - 0.10 * u, scale=0.9 - 0.35 * u)
        frames.append(SkeletonFrame(persons=(p0, p1, p2)))
    return SkeletonSequence(fps=fps, frames=tuple(frames), source_size=(1280, 720))


def untracked_document(seq: SkeletonSequence) -> str:
    """The same motion serialized with every person id erased (-1)."""
    from previz.skelio import SCHEMA

    out = [
        SCHEMA,
        f"fps {seq.fps!r}",
        f"frames {len(seq.frames)}",
        f"source_size {seq.source_size[0]} {seq.source_size[1]}",
    ]
    for i, frame in enumerate(seq.frames):
        out.append(f"frame {i}")
        for p in frame.persons:
            nums = " ".join(f"{x!r} {y!r} {c!r}" for x, y, c in p.joints)
            out.append(f"person -1 {nums}")
    return "\n".join(out) + "\n"
