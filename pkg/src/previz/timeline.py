"""Tracks, keyframes, motion paths, clips, and frame-plan composition.

A Track animates exactly one property of its target (a camera transform,
camera fov, an entity transform, or an appearance value), so a camera with
animated pose and lens carries two tracks. All values are immutable;
mutating operations return new objects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

from .geometry import RotationQ, Transform, Vec3, lerp, slerp, smoothstep
from .scene import RGB, Scene, _check_rgb

FPS_DEFAULT = 16
MAX_CLIP_SECONDS = 5.0

TRACK_KINDS = ("camera", "element-animation", "fixed-element")
EASINGS = ("linear", "ease-in-out")

# Properties each track kind may animate.
_KIND_PROPS = {
    "camera": ("transform", "fov"),
    "element-animation": ("transform",),
    "fixed-element": ("color", "intensity"),
}

KeyValue = Union[Transform, float, RGB]


class TimelineError(Exception):
    pass


class DuplicateTime(TimelineError):
    pass


class TypeMismatch(TimelineError):
    pass


class EmptyTrack(TimelineError):
    pass


class CameraGap(TimelineError):
    pass


class CameraOverlap(TimelineError):
    pass


class ClipInvalid(TimelineError):
    pass


@dataclass(frozen=True)
class Keyframe:
    t: float
    value: KeyValue
    easing: str = "linear"

    def __post_init__(self):
        if not math.isfinite(self.t) or self.t < 0.0:
            raise TimelineError(f"keyframe time must be finite and >= 0, got {self.t}")
        if self.easing not in EASINGS:
            raise TimelineError(f"unknown easing {self.easing!r}")


@dataclass(frozen=True)
class MotionPath:
    """Timed translation + yaw samples for one entity, recorded or authored."""

    entity_id: str
    samples: tuple[tuple[float, Vec3, float], ...]  # (t, translation, yaw)
    source: str = "authored"

    def __post_init__(self):
        if len(self.samples) < 2:
            raise TimelineError("motion path needs at least 2 samples")
        times = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise TimelineError("motion path sample times must strictly increase")
        if self.source not in ("recorded", "authored"):
            raise TimelineError(f"unknown motion path source {self.source!r}")

    @property
    def t_start(self) -> float:
        return self.samples[0][0]

    @property
    def t_end(self) -> float:
        return self.samples[-1][0]

    def sample(self, t: float) -> tuple[Vec3, float]:
        """Piecewise-linear translation and yaw, clamped at the endpoints."""
        s = self.samples
        if t <= s[0][0]:
            return s[0][1], s[0][2]
        if t >= s[-1][0]:
            return s[-1][1], s[-1][2]
        lo, hi = 0, len(s) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if s[mid][0] <= t:
                lo = mid
            else:
                hi = mid
        t0, p0, y0 = s[lo]
        t1, p1, y1 = s[hi]
        u = (t - t0) / (t1 - t0)
        pos = p0 + (p1 - p0) * u
        # Yaw interpolates along the shorter angular arc.
        dy = math.remainder(y1 - y0, 2.0 * math.pi)
        return pos, y0 + dy * u


_PROP_CHECKS = {
    "transform": lambda v: isinstance(v, Transform),
    "fov": lambda v: isinstance(v, (int, float)),
    "intensity": lambda v: isinstance(v, (int, float)),
    "color": lambda v: isinstance(v, tuple) and len(v) == 3,
}


@dataclass(frozen=True)
class Track:
    id: str
    kind: str
    target_id: str
    prop: str = "transform"
    keyframes: tuple[Keyframe, ...] = ()
    motion_paths: tuple[MotionPath, ...] = ()

    def __post_init__(self):
        if self.kind not in TRACK_KINDS:
            raise TimelineError(f"unknown track kind {self.kind!r}")
        if self.prop not in _KIND_PROPS[self.kind]:
            raise TypeMismatch(f"{self.kind} track cannot animate {self.prop!r}")
        if self.motion_paths and self.kind != "element-animation":
            raise TimelineError("only element-animation tracks carry motion paths")
        times = [k.t for k in self.keyframes]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise TimelineError("keyframe times must strictly increase")
        check = _PROP_CHECKS[self.prop]
        for k in self.keyframes:
            if not check(k.value):
                raise TypeMismatch(f"keyframe value {k.value!r} does not fit property {self.prop!r}")


def add_keyframe(track: Track, kf: Keyframe) -> Track:
    """Insert keeping times sorted; duplicate times are rejected."""
    if not _PROP_CHECKS[track.prop](kf.value):
        raise TypeMismatch(f"value {kf.value!r} does not fit {track.kind}/{track.prop} track")
    if kf.value is not None and track.prop == "color":
        _check_rgb(kf.value, "keyframe color")
    times = [k.t for k in track.keyframes]
    if kf.t in times:
        raise DuplicateTime(f"track {track.id!r} already has a keyframe at t={kf.t}")
    kfs = sorted(track.keyframes + (kf,), key=lambda k: k.t)
    return replace(track, keyframes=tuple(kfs))


def attach_motion_path(track: Track, path: MotionPath) -> Track:
    if track.kind != "element-animation":
        raise TimelineError("motion paths attach to element-animation tracks only")
    if path.entity_id != track.target_id:
        raise TimelineError(f"path for {path.entity_id!r} cannot attach to track targeting {track.target_id!r}")
    return replace(track, motion_paths=track.motion_paths + (path,))


def _interp(prop: str, a: KeyValue, b: KeyValue, u: float) -> KeyValue:
    if prop == "transform":
        return Transform(
            translation=a.translation + (b.translation - a.translation) * u,
            rotation=slerp(a.rotation, b.rotation, u),
            scale=a.scale + (b.scale - a.scale) * u,
        )
    if prop == "color":
        return tuple(lerp(ca, cb, u) for ca, cb in zip(a, b))
    return lerp(float(a), float(b), u)


def sample_track(track: Track, t: float) -> KeyValue:
    """Value at time t; clamps to endpoint values outside the keyframe range.

    The outgoing keyframe's easing shapes its segment (ease-in-out applies
    smoothstep to the interpolation parameter).
    """
    kfs = track.keyframes
    if not kfs:
        raise EmptyTrack(f"track {track.id!r} has no keyframes")
    if t <= kfs[0].t:
        return kfs[0].value
    if t >= kfs[-1].t:
        return kfs[-1].value
    lo, hi = 0, len(kfs) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if kfs[mid].t <= t:
            lo = mid
        else:
            hi = mid
    a, b = kfs[lo], kfs[hi]
    u = (t - a.t) / (b.t - a.t)
    if a.easing == "ease-in-out":
        u = smoothstep(u)
    return _interp(track.prop, a.value, b.value, u)


@dataclass(frozen=True)
class Clip:
    id: str
    camera_id: str
    t_in: float
    t_out: float
    fps: int = FPS_DEFAULT
    attached_style_image: Optional[str] = None
    attached_video_result: Optional[str] = None
    status: str = "draft"

    def __post_init__(self):
        if not (self.t_in < self.t_out):
            raise ClipInvalid(f"clip {self.id!r}: t_in must be < t_out")
        if self.t_out - self.t_in > MAX_CLIP_SECONDS + 1e-9:
            raise ClipInvalid(f"clip {self.id!r}: duration exceeds {MAX_CLIP_SECONDS}s cap")
        if self.fps <= 0:
            raise ClipInvalid(f"clip {self.id!r}: fps must be > 0")
        if self.status not in ("draft", "rendered", "submitted", "generated", "failed"):
            raise ClipInvalid(f"clip {self.id!r}: unknown status {self.status!r}")

    @property
    def frame_count(self) -> int:
        return round((self.t_out - self.t_in) * self.fps)


@dataclass(frozen=True)
class Timeline:
    scene_id: str
    tracks: tuple[Track, ...] = ()
    clips: tuple[Clip, ...] = ()

    def track(self, track_id: str) -> Track:
        for tr in self.tracks:
            if tr.id == track_id:
                return tr
        raise TimelineError(f"no track {track_id!r}")

    def clip(self, clip_id: str) -> Clip:
        for c in self.clips:
            if c.id == clip_id:
                return c
        raise TimelineError(f"no clip {clip_id!r}")


def validate_timeline(timeline: Timeline, scene: Scene) -> None:
    """Referential integrity against the scene plus per-camera clip overlap."""
    if timeline.scene_id != scene.id:
        raise TimelineError(f"timeline is for scene {timeline.scene_id!r}, not {scene.id!r}")
    for tr in timeline.tracks:
        if tr.kind == "camera":
            scene.camera(tr.target_id)
        elif tr.kind == "element-animation":
            ent = scene.entity(tr.target_id)
            if not ent.movable:
                raise TimelineError(f"element-animation track targets non-movable entity {ent.id!r}")
        else:
            if not scene.has_id(tr.target_id):
                raise TimelineError(f"fixed-element track targets unknown id {tr.target_id!r}")
    for c in timeline.clips:
        scene.camera(c.camera_id)
    _check_clip_overlap(timeline.clips)


def _check_clip_overlap(clips) -> None:
    """Per-camera overlap ban; clips on different cameras may coexist in
    time (compose_sequence enforces exactly-one-active over its range)."""
    by_camera: dict[str, list[Clip]] = {}
    for c in clips:
        by_camera.setdefault(c.camera_id, []).append(c)
    for group in by_camera.values():
        ordered = sorted(group, key=lambda c: c.t_in)
        for a, b in zip(ordered, ordered[1:]):
            if b.t_in < a.t_out:
                raise CameraOverlap(
                    f"clips {a.id!r} and {b.id!r} on camera {a.camera_id!r} "
                    f"overlap in [{b.t_in}, {min(a.t_out, b.t_out)})")


def add_track(timeline: Timeline, track: Track) -> Timeline:
    if any(tr.id == track.id for tr in timeline.tracks):
        raise TimelineError(f"track id {track.id!r} already used")
    return replace(timeline, tracks=timeline.tracks + (track,))


def replace_track(timeline: Timeline, track: Track) -> Timeline:
    tracks = tuple(track if tr.id == track.id else tr for tr in timeline.tracks)
    if track not in tracks:
        raise TimelineError(f"no track {track.id!r}")
    return replace(timeline, tracks=tracks)


def add_clip(timeline: Timeline, clip: Clip) -> Timeline:
    if any(c.id == clip.id for c in timeline.clips):
        raise TimelineError(f"clip id {clip.id!r} already used")
    clips = timeline.clips + (clip,)
    _check_clip_overlap(clips)
    return replace(timeline, clips=clips)


def update_clip(timeline: Timeline, clip: Clip) -> Timeline:
    clips = tuple(clip if c.id == clip.id else c for c in timeline.clips)
    if clip not in clips:
        raise TimelineError(f"no clip {clip.id!r}")
    _check_clip_overlap(clips)
    return replace(timeline, clips=clips)


# ---------------------------------------------------------------------------
# Frame plans


@dataclass(frozen=True)
class FrameState:
    t: float
    camera_id: str
    camera_transform: Transform
    fov_deg: float
    entity_transforms: tuple[tuple[str, Transform], ...]
    entity_colors: tuple[tuple[str, RGB], ...]
    light_states: tuple[tuple[str, RGB, float], ...]

    def entity_transform_map(self) -> dict[str, Transform]:
        return dict(self.entity_transforms)

    def entity_color_map(self) -> dict[str, RGB]:
        return dict(self.entity_colors)

    def light_state_map(self) -> dict[str, tuple[RGB, float]]:
        return {lid: (c, i) for lid, c, i in self.light_states}


@dataclass(frozen=True)
class FramePlan:
    scene_id: str
    fps: int
    t0: float
    frames: tuple[FrameState, ...]


def _active_clip(clips, t: float) -> Clip:
    active = [c for c in clips if c.t_in <= t < c.t_out]
    if not active:
        raise CameraGap(f"no camera clip active at t={t}")
    if len(active) > 1:
        ids = ", ".join(repr(c.id) for c in active)
        raise CameraOverlap(f"clips {ids} all active at t={t}")
    return active[0]


def _entity_transform_at(scene, tracks, entity_id: str, t: float) -> Transform:
    base = scene.entity(entity_id).transform
    value = base
    for tr in tracks:
        if tr.kind != "element-animation" or tr.target_id != entity_id:
            continue
        if tr.keyframes:
            value = sample_track(tr, t)
        for path in tr.motion_paths:
            # Recorded paths override translation and facing; scale persists.
            pos, yaw = path.sample(t)
            value = Transform(translation=pos, rotation=RotationQ.yaw(yaw), scale=value.scale)
    return value


def compose_sequence(scene: Scene, timeline: Timeline, t0: float, t1: float, fps: int) -> FramePlan:
    """Flatten the timeline into per-frame camera, transform, and appearance state.

    Exactly one camera clip must be active at every sampled instant. Frame k
    samples t0 + k/fps; the frame count is round((t1-t0)*fps).
    """
    validate_timeline(timeline, scene)
    if not (t1 > t0):
        raise TimelineError("need t1 > t0")
    if fps <= 0:
        raise TimelineError("fps must be > 0")
    n = round((t1 - t0) * fps)
    if n <= 0:
        raise TimelineError("range shorter than one frame")

    frames = []
    for k in range(n):
        t = t0 + k / fps
        clip = _active_clip(timeline.clips, t)
        cam = scene.camera(clip.camera_id)
        cam_xf, cam_fov = cam.transform, cam.fov_deg
        for tr in timeline.tracks:
            if tr.kind == "camera" and tr.target_id == cam.id and tr.keyframes:
                if tr.prop == "transform":
                    cam_xf = sample_track(tr, t)
                else:
                    cam_fov = float(sample_track(tr, t))

        ent_ids = sorted(e.id for e in scene.entities)
        transforms = tuple((eid, _entity_transform_at(scene, timeline.tracks, eid, t)) for eid in ent_ids)

        colors = {e.id: e.base_color for e in scene.entities}
        lights = {l.id: (l.color, l.intensity) for l in scene.lights}
        for tr in timeline.tracks:
            if tr.kind != "fixed-element" or not tr.keyframes:
                continue
            v = sample_track(tr, t)
            if tr.prop == "color":
                if tr.target_id in colors:
                    colors[tr.target_id] = tuple(v)
                elif tr.target_id in lights:
                    lights[tr.target_id] = (tuple(v), lights[tr.target_id][1])
            else:
                if tr.target_id in lights:
                    lights[tr.target_id] = (lights[tr.target_id][0], float(v))

        frames.append(FrameState(
            t=t,
            camera_id=cam.id,
            camera_transform=cam_xf,
            fov_deg=cam_fov,
            entity_transforms=transforms,
            entity_colors=tuple(sorted(colors.items())),
            light_states=tuple((lid, c, i) for lid, (c, i) in sorted(lights.items())),
        ))
    return FramePlan(scene_id=scene.id, fps=fps, t0=t0, frames=tuple(frames))


def frame_plan_table(plan: FramePlan) -> str:
    """Human-readable dump used by the CLI diagnostics path."""
    lines = [f"scene={plan.scene_id} fps={plan.fps} frames={len(plan.frames)}"]
    for i, f in enumerate(plan.frames):
        p = f.camera_transform.translation
        lines.append(
            f"{i:04d} t={f.t:.4f} cam={f.camera_id} pos=({p.x:.3f},{p.y:.3f},{p.z:.3f}) fov={f.fov_deg:.2f}"
        )
        for eid, xf in f.entity_transforms:
            q = xf.translation
            lines.append(f"     {eid}: ({q.x:.3f},{q.y:.3f},{q.z:.3f})")
    return "\n".join(lines) + "\n"
