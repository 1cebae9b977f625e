"""Skeleton motion as data: crop, split, transform, recomposite, blend.

A SkeletonSequence is the remixable motion currency: per-frame,
per-person 2D keypoints in the unit square. Layers isolate one person so
the user can reposition or rescale them before recompositing a guidance
sequence, or re-anchor them onto a 3D motion path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .geometry import Vec3
from .pose_overlay import JOINT_INDEX, JOINT_NAMES
from .scene import Camera, project_point
from .timeline import MotionPath, Track, sample_track

JOINT_COUNT = len(JOINT_NAMES)
_R_HIP = JOINT_INDEX["right_hip"]
_L_HIP = JOINT_INDEX["left_hip"]


class SkeletonError(Exception):
    pass


class EmptyRange(SkeletonError):
    pass


class NoPersons(SkeletonError):
    pass


class NonPositiveScale(SkeletonError):
    pass


class NoOverlap(SkeletonError):
    pass


@dataclass(frozen=True)
class PersonPose:
    person_id: int
    joints: tuple[tuple[float, float, float], ...]  # 18 x (x, y, confidence)

    def __post_init__(self):
        if len(self.joints) != JOINT_COUNT:
            raise SkeletonError(f"pose needs {JOINT_COUNT} joints, got {len(self.joints)}")

    def root(self) -> tuple[float, float]:
        """Hip midpoint; the anchor used by re-anchoring operations."""
        rx, ry, _ = self.joints[_R_HIP]
        lx, ly, _ = self.joints[_L_HIP]
        return (0.5 * (rx + lx), 0.5 * (ry + ly))


@dataclass(frozen=True)
class SkeletonFrame:
    persons: tuple[PersonPose, ...] = ()

    def person(self, person_id: int) -> Optional[PersonPose]:
        for p in self.persons:
            if p.person_id == person_id:
                return p
        return None


@dataclass(frozen=True)
class SkeletonSequence:
    fps: float
    frames: tuple[SkeletonFrame, ...]
    source_size: tuple[int, int] = (1920, 1080)

    def __post_init__(self):
        if self.fps <= 0:
            raise SkeletonError(f"fps must be > 0, got {self.fps}")

    @property
    def duration(self) -> float:
        return len(self.frames) / self.fps

    def person_ids(self) -> list[int]:
        seen = []
        for f in self.frames:
            for p in f.persons:
                if p.person_id not in seen:
                    seen.append(p.person_id)
        return sorted(seen)


@dataclass(frozen=True)
class Placement:
    translate: tuple[float, float] = (0.0, 0.0)
    scale: float = 1.0
    anchor: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        if self.scale <= 0:
            raise NonPositiveScale(f"scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class SkeletonLayer:
    """One person's poses with the cumulative placement applied to them."""

    person_id: int
    fps: float
    frames: tuple[Optional[PersonPose], ...]
    placement: Placement = field(default_factory=Placement)

    def present_range(self) -> tuple[int, int]:
        idxs = [i for i, f in enumerate(self.frames) if f is not None]
        if not idxs:
            raise NoPersons(f"layer {self.person_id} has no poses")
        return idxs[0], idxs[-1]

    def out_of_frame_joints(self) -> int:
        """Joints pushed outside the unit square by placement edits."""
        n = 0
        for f in self.frames:
            if f is None:
                continue
            for x, y, c in f.joints:
                if c > 0 and not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                    n += 1
        return n


def crop(seq: SkeletonSequence, t0: float, t1: float) -> SkeletonSequence:
    """Frames with time in [t0, t1); frame i sits at i/fps. Ids survive."""
    if not (0.0 <= t0 < t1 <= seq.duration + 1e-9):
        raise EmptyRange(f"invalid crop range [{t0}, {t1}) for duration {seq.duration}")
    first = math.ceil(round(t0 * seq.fps, 9))
    last = math.ceil(round(t1 * seq.fps, 9))  # exclusive
    frames = seq.frames[first:last]
    if not frames:
        raise EmptyRange(f"crop [{t0}, {t1}) selects no frames")
    return replace(seq, frames=frames)


def split_layers(seq: SkeletonSequence) -> list[SkeletonLayer]:
    """One identity-placement layer per person; their union rebuilds seq."""
    ids = seq.person_ids()
    if not ids:
        raise NoPersons("sequence contains no persons")
    layers = []
    for pid in ids:
        frames = tuple(f.person(pid) for f in seq.frames)
        layers.append(SkeletonLayer(person_id=pid, fps=seq.fps, frames=frames))
    return layers


def _map_pose(pose: PersonPose, fn) -> PersonPose:
    return PersonPose(
        person_id=pose.person_id,
        joints=tuple(fn(x, y, c) for x, y, c in pose.joints),
    )


def transform_layer(
    layer: SkeletonLayer,
    translate: tuple[float, float] = (0.0, 0.0),
    scale: float = 1.0,
    anchor: tuple[float, float] = (0.5, 0.5),
) -> SkeletonLayer:
    """p -> anchor + scale*(p - anchor) + translate on every keypoint.

    Coordinates may leave the unit square mid-edit; recomposite clamps.
    """
    if scale <= 0:
        raise NonPositiveScale(f"scale must be > 0, got {scale}")
    ax, ay = anchor
    tx, ty = translate
    # canonical form s*p + v of anchor + s*(p - anchor) + translate;
    # keeps the identity transform bit-exact
    vx = ax * (1.0 - scale) + tx
    vy = ay * (1.0 - scale) + ty

    def fn(x, y, c):
        return (scale * x + vx, scale * y + vy, c)

    frames = tuple(None if f is None else _map_pose(f, fn) for f in layer.frames)
    # fold into the cumulative placement: total map is p -> S*p + V
    s0 = layer.placement.scale
    a0x, a0y = layer.placement.anchor
    t0x, t0y = layer.placement.translate
    v0 = (a0x * (1 - s0) + t0x, a0y * (1 - s0) + t0y)
    v1 = (ax * (1 - scale) + tx, ay * (1 - scale) + ty)
    total_s = scale * s0
    total_v = (scale * v0[0] + v1[0], scale * v0[1] + v1[1])
    placement = Placement(
        translate=(total_v[0] - ax * (1 - total_s), total_v[1] - ay * (1 - total_s)),
        scale=total_s,
        anchor=anchor,
    )
    return SkeletonLayer(person_id=layer.person_id, fps=layer.fps, frames=frames, placement=placement)


def _clamped(pose: PersonPose) -> PersonPose:
    return _map_pose(pose, lambda x, y, c: (min(1.0, max(0.0, x)), min(1.0, max(0.0, y)), c))


def recomposite(
    layers: list[SkeletonLayer],
    fps: float,
    duration: float,
    source_size: tuple[int, int] = (1920, 1080),
) -> SkeletonSequence:
    """Merge layers into one guidance sequence; persons sort by person_id.

    Overlapping persons are both kept (occlusion is the generator's
    problem); layers at other rates are resampled by nearest frame.
    """
    if duration <= 0:
        raise SkeletonError("duration must be > 0")
    if fps <= 0:
        raise SkeletonError("fps must be > 0")
    n = round(duration * fps)
    frames = []
    ordered = sorted(layers, key=lambda l: l.person_id)
    for k in range(n):
        t = k / fps
        persons = []
        for layer in ordered:
            if layer.fps == fps:
                idx = k
            else:
                idx = int(round(t * layer.fps))
            if 0 <= idx < len(layer.frames) and layer.frames[idx] is not None:
                persons.append(_clamped(layer.frames[idx]))
        frames.append(SkeletonFrame(persons=tuple(persons)))
    return SkeletonSequence(fps=fps, frames=tuple(frames), source_size=source_size)


def blend_with_blocking(
    layer: SkeletonLayer,
    motion_path: MotionPath,
    camera: Camera,
    camera_track: Optional[Track] = None,
    fps: Optional[float] = None,
    viewport: tuple[int, int] = (1920, 1080),
    root_offset: Vec3 = Vec3(),
) -> SkeletonLayer:
    """Re-anchor the layer's root onto the entity's projected 3D path.

    Per frame, the hip midpoint moves to the projected path position and
    limb offsets scale by reference_depth / frame_depth (nearer = larger).
    The reference depth comes from the first overlapping frame. Frames
    outside the path's time range are left untouched.
    """
    rate = fps if fps is not None else layer.fps
    w, h = viewport

    def camera_pose(t):
        if camera_track is not None and camera_track.keyframes:
            if camera_track.prop == "transform":
                return sample_track(camera_track, t), None
            return None, float(sample_track(camera_track, t))
        return None, None

    overlap = [
        i for i, f in enumerate(layer.frames)
        if f is not None and motion_path.t_start <= i / rate <= motion_path.t_end
    ]
    if not overlap:
        raise NoOverlap("motion path and layer do not overlap in time")

    ref_depth = None
    frames = list(layer.frames)
    for i in overlap:
        t = i / rate
        pos, _yaw = motion_path.sample(t)
        cam_xf, cam_fov = camera_pose(t)
        hit = project_point(camera, pos + root_offset, viewport,
                            camera_transform=cam_xf, fov_deg=cam_fov)
        if hit is None:
            continue  # entity off screen this frame; keep the source pose
        px, py, depth = hit
        if ref_depth is None:
            ref_depth = depth
        k = ref_depth / depth
        nx, ny = px / w, py / h
        pose = frames[i]
        rx, ry = pose.root()

        def fn(x, y, c, _k=k, _nx=nx, _ny=ny, _rx=rx, _ry=ry):
            return (_nx + _k * (x - _rx), _ny + _k * (y - _ry), c)

        frames[i] = _map_pose(pose, fn)
    return SkeletonLayer(
        person_id=layer.person_id, fps=layer.fps, frames=tuple(frames), placement=layer.placement
    )


def sequence_equal(a: SkeletonSequence, b: SkeletonSequence, tol: float = 1e-6) -> bool:
    """Coordinate comparison within tol; structure and metadata exact."""
    if a.fps != b.fps or len(a.frames) != len(b.frames) or a.source_size != b.source_size:
        return False
    for fa, fb in zip(a.frames, b.frames):
        if len(fa.persons) != len(fb.persons):
            return False
        for pa, pb in zip(fa.persons, fb.persons):
            if pa.person_id != pb.person_id:
                return False
            for (xa, ya, ca), (xb, yb, cb) in zip(pa.joints, pb.joints):
                if abs(xa - xb) > tol or abs(ya - yb) > tol or abs(ca - cb) > tol:
                    return False
    return True
