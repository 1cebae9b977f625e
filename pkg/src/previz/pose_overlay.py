"""18-joint skeleton rendering and rig projection.

The joint schema is the common 18-joint body used by pose-conditioned
generators; its tree has 17 limbs. Joints under the confidence floor are
dropped together with their incident limbs. Colors come from a fixed
per-limb table so overlays are comparable across runs.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .geometry import Transform, Vec3
from .scene import Camera, SceneError, project_point

CONFIDENCE_FLOOR = 0.3

JOINT_NAMES = (
    "nose", "neck",
    "right_shoulder", "right_elbow", "right_wrist",
    "left_shoulder", "left_elbow", "left_wrist",
    "right_hip", "right_knee", "right_ankle",
    "left_hip", "left_knee", "left_ankle",
    "right_eye", "left_eye", "right_ear", "left_ear",
)
JOINT_INDEX = {name: i for i, name in enumerate(JOINT_NAMES)}

# 17 limbs: the spanning tree of the 18-joint body.
LIMBS = (
    (1, 0),            # neck-nose
    (0, 14), (14, 16),  # nose-right_eye-right_ear
    (0, 15), (15, 17),  # nose-left_eye-left_ear
    (1, 2), (2, 3), (3, 4),     # right arm
    (1, 5), (5, 6), (6, 7),     # left arm
    (1, 8), (8, 9), (9, 10),    # right leg
    (1, 11), (11, 12), (12, 13),  # left leg
)

LIMB_COLORS = (
    (255, 0, 0), (255, 85, 0), (255, 170, 0), (255, 255, 0), (170, 255, 0),
    (85, 255, 0), (0, 255, 0), (0, 255, 85), (0, 255, 170), (0, 255, 255),
    (0, 170, 255), (0, 85, 255), (0, 0, 255), (85, 0, 255), (170, 0, 255),
    (255, 0, 255), (255, 0, 170),
)
JOINT_COLORS = LIMB_COLORS + ((255, 85, 170),)


class NoRig(SceneError):
    pass


def stick_radius(size: tuple[int, int]) -> float:
    return max(1.0, min(size) / 128.0)


def _blend_coverage(img: np.ndarray, y0: int, x0: int, alpha: np.ndarray, color) -> None:
    h, w = alpha.shape
    region = img[y0:y0 + h, x0:x0 + w].astype(np.float64)
    a = alpha[..., None]
    col = np.array(color, dtype=np.float64)
    img[y0:y0 + h, x0:x0 + w] = np.floor(region * (1.0 - a) + col * a + 0.5).astype(np.uint8)


def _draw_capsule(img: np.ndarray, p0, p1, radius: float, color) -> None:
    """Anti-aliased thick segment via distance-to-segment coverage."""
    h, w = img.shape[:2]
    pad = radius + 1.5
    min_x = max(0, int(math.floor(min(p0[0], p1[0]) - pad)))
    max_x = min(w - 1, int(math.ceil(max(p0[0], p1[0]) + pad)))
    min_y = max(0, int(math.floor(min(p0[1], p1[1]) - pad)))
    max_y = min(h - 1, int(math.ceil(max(p0[1], p1[1]) + pad)))
    if min_x > max_x or min_y > max_y:
        return
    xs = np.arange(min_x, max_x + 1, dtype=np.float64) + 0.5
    ys = np.arange(min_y, max_y + 1, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        dist = np.hypot(gx - p0[0], gy - p0[1])
    else:
        u = np.clip(((gx - p0[0]) * dx + (gy - p0[1]) * dy) / len2, 0.0, 1.0)
        dist = np.hypot(gx - (p0[0] + u * dx), gy - (p0[1] + u * dy))
    alpha = np.clip(radius + 0.5 - dist, 0.0, 1.0)
    _blend_coverage(img, min_y, min_x, alpha, color)


def render_pose_overlay(persons, size: tuple[int, int]) -> np.ndarray:
    """Draw skeletons onto black; keypoints are normalized [0,1]^2 triples.

    `persons` is an iterable of 18-element sequences of (x, y, confidence),
    drawn in the given order (recomposite emits person_id order).
    """
    w, h = size
    img = np.zeros((h, w, 3), dtype=np.uint8)
    r = stick_radius(size)
    for joints in persons:
        if len(joints) != len(JOINT_NAMES):
            raise SceneError(f"expected {len(JOINT_NAMES)} joints, got {len(joints)}")
        px = [(x * w, y * h, c) for x, y, c in joints]
        for limb_i, (a, b) in enumerate(LIMBS):
            if px[a][2] < CONFIDENCE_FLOOR or px[b][2] < CONFIDENCE_FLOOR:
                continue
            _draw_capsule(img, px[a][:2], px[b][:2], r, LIMB_COLORS[limb_i])
        for j, (x, y, c) in enumerate(px):
            if c < CONFIDENCE_FLOOR:
                continue
            _draw_capsule(img, (x, y), (x, y), r + 1.0, JOINT_COLORS[j])
    return img


def project_rig(
    entity,
    camera: Camera,
    entity_transform: Optional[Transform] = None,
    camera_transform: Optional[Transform] = None,
    fov_deg: Optional[float] = None,
    viewport: tuple[int, int] = (1920, 1080),
) -> list[tuple[float, float, float]]:
    """Project an entity's rig joints to normalized keypoints.

    Returns 18 (x, y, confidence) triples in rig schema order; joints that
    fall off screen (or are missing from the rig) carry confidence 0.
    """
    if entity.rig is None:
        raise NoRig(f"entity {entity.id!r} has no rig")
    xf = entity_transform if entity_transform is not None else entity.transform
    joint_map = entity.rig.joint_map()
    w, h = viewport
    out = []
    for name in JOINT_NAMES:
        offset = joint_map.get(name)
        if offset is None:
            out.append((0.0, 0.0, 0.0))
            continue
        world = xf.apply(offset)
        hit = project_point(camera, world, viewport, camera_transform=camera_transform, fov_deg=fov_deg)
        if hit is None:
            out.append((0.0, 0.0, 0.0))
        else:
            out.append((hit[0] / w, hit[1] / h, 1.0))
    return out


def rig_overlay_for_frame(scene, frame_state, size: tuple[int, int]) -> Optional[np.ndarray]:
    """Pose channel for a FrameState: all rigged characters, entity order."""
    persons = []
    transforms = frame_state.entity_transform_map()
    camera = scene.camera(frame_state.camera_id)
    for entity in scene.entities:
        if entity.rig is None:
            continue
        persons.append(project_rig(
            entity,
            camera,
            entity_transform=transforms.get(entity.id, entity.transform),
            camera_transform=frame_state.camera_transform,
            fov_deg=frame_state.fov_deg,
            viewport=size,
        ))
    if not persons:
        return None
    return render_pose_overlay(persons, size)


def humanoid_rig(height: float = 1.7):
    """Canonical standing rig, feet at local origin, facing -Z."""
    from .scene import CanonicalRig

    u = height / 1.7
    sh, hip = 0.18 * u, 0.16 * u  # half shoulder / hip widths
    joints = {
        "nose": Vec3(0.0, 1.62 * u, -0.08 * u),
        "neck": Vec3(0.0, 1.45 * u, 0.0),
        "right_shoulder": Vec3(-sh, 1.42 * u, 0.0),
        "right_elbow": Vec3(-sh - 0.02 * u, 1.12 * u, 0.0),
        "right_wrist": Vec3(-sh - 0.03 * u, 0.84 * u, 0.0),
        "left_shoulder": Vec3(sh, 1.42 * u, 0.0),
        "left_elbow": Vec3(sh + 0.02 * u, 1.12 * u, 0.0),
        "left_wrist": Vec3(sh + 0.03 * u, 0.84 * u, 0.0),
        "right_hip": Vec3(-hip * 0.5, 0.92 * u, 0.0),
        "right_knee": Vec3(-hip * 0.5, 0.48 * u, 0.0),
        "right_ankle": Vec3(-hip * 0.5, 0.06 * u, 0.0),
        "left_hip": Vec3(hip * 0.5, 0.92 * u, 0.0),
        "left_knee": Vec3(hip * 0.5, 0.48 * u, 0.0),
        "left_ankle": Vec3(hip * 0.5, 0.06 * u, 0.0),
        "right_eye": Vec3(-0.04 * u, 1.66 * u, -0.07 * u),
        "left_eye": Vec3(0.04 * u, 1.66 * u, -0.07 * u),
        "right_ear": Vec3(-0.08 * u, 1.64 * u, -0.01 * u),
        "left_ear": Vec3(0.08 * u, 1.64 * u, -0.01 * u),
    }
    return CanonicalRig(joints=tuple(sorted(joints.items())))
