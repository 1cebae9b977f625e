"""Project model and the self-describing project file.

A project file is one JSON text document; binary artifacts live in a
sibling content-addressed asset directory and are referenced by hash. The
document carries a checksum of its canonical payload, and fields this
version does not know are preserved through load/save so newer files
survive a round-trip through an older build.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .gateway import JobRecord
from .geometry import RotationQ, Transform, Vec3
from .scene import (
    Camera,
    CanonicalRig,
    Light,
    ProxyGeometry,
    Scene,
    SceneEntity,
)
from .skeleton import SkeletonSequence
from .skelio import dump_document, parse_document
from .styling import CharacterProfile, StyleRegistry, default_registry, dump_registry, parse_registry
from .timeline import Clip, Keyframe, MotionPath, Timeline, Track, validate_timeline

SCHEMA_VERSION = "previz-project/1"


class ProjectError(Exception):
    pass


class SchemaVersionMismatch(ProjectError):
    pass


class CorruptFile(ProjectError):
    pass


@dataclass(frozen=True)
class HistoryEntry:
    job: JobRecord
    clip_id: Optional[str] = None
    label: str = ""
    superseded: bool = False


@dataclass(frozen=True)
class VideoTrackRef:
    """A processed skeleton placed on a scene's timeline as motion guidance."""

    id: str
    scene_id: str
    skeleton_name: str
    t0: float = 0.0


@dataclass(frozen=True)
class Project:
    id: str
    name: str
    scenes: tuple[Scene, ...] = ()
    timelines: tuple[Timeline, ...] = ()
    skeletons: tuple[tuple[str, SkeletonSequence], ...] = ()
    video_tracks: tuple[VideoTrackRef, ...] = ()
    profiles: tuple[CharacterProfile, ...] = ()
    registry: StyleRegistry = field(default_factory=default_registry)
    history: tuple[HistoryEntry, ...] = ()
    schema_version: str = SCHEMA_VERSION
    extras: tuple[tuple[str, str], ...] = ()  # (json path, raw unknown-field json)

    def scene(self, scene_id: str) -> Scene:
        for s in self.scenes:
            if s.id == scene_id:
                return s
        raise ProjectError(f"no scene {scene_id!r}")

    def timeline(self, scene_id: str) -> Timeline:
        for t in self.timelines:
            if t.scene_id == scene_id:
                return t
        raise ProjectError(f"no timeline for scene {scene_id!r}")

    def skeleton(self, name: str) -> SkeletonSequence:
        for n, s in self.skeletons:
            if n == name:
                return s
        raise ProjectError(f"no skeleton {name!r}")

    def with_scene(self, scene: Scene) -> "Project":
        if any(s.id == scene.id for s in self.scenes):
            scenes = tuple(scene if s.id == scene.id else s for s in self.scenes)
        else:
            scenes = self.scenes + (scene,)
        return replace(self, scenes=scenes)

    def with_timeline(self, timeline: Timeline) -> "Project":
        validate_timeline(timeline, self.scene(timeline.scene_id))
        if any(t.scene_id == timeline.scene_id for t in self.timelines):
            tls = tuple(timeline if t.scene_id == timeline.scene_id else t for t in self.timelines)
        else:
            tls = self.timelines + (timeline,)
        return replace(self, timelines=tls)

    def with_skeleton(self, name: str, seq: SkeletonSequence) -> "Project":
        entries = tuple((n, s) for n, s in self.skeletons if n != name) + ((name, seq),)
        return replace(self, skeletons=entries)

    def with_video_track(self, ref: VideoTrackRef) -> "Project":
        kept = tuple(v for v in self.video_tracks if v.id != ref.id)
        return replace(self, video_tracks=kept + (ref,))

    def with_profile(self, profile: CharacterProfile) -> "Project":
        kept = tuple(p for p in self.profiles if p.character_id != profile.character_id)
        return replace(self, profiles=kept + (profile,))

    def with_history(self, entry: HistoryEntry) -> "Project":
        return replace(self, history=self.history + (entry,))

    def profile(self, character_id: str) -> CharacterProfile:
        for p in self.profiles:
            if p.character_id == character_id:
                return p
        raise ProjectError(f"no character profile {character_id!r}")


# ---------------------------------------------------------------------------
# Serializers. Each *_to/from pair lists its known keys; anything else is
# captured into the project's extras so future fields survive.


def _split_extra(d: dict, known: tuple[str, ...], path: str, extras: list) -> dict:
    unknown = {k: v for k, v in d.items() if k not in known}
    if unknown:
        extras.append((path, json.dumps(unknown, sort_keys=True)))
    return d


def _merge_extra(d: dict, path: str, extras: dict[str, str]) -> dict:
    if path in extras:
        d.update(json.loads(extras[path]))
    return d


def vec3_to(v: Vec3) -> list:
    return [v.x, v.y, v.z]


def vec3_from(d) -> Vec3:
    return Vec3(float(d[0]), float(d[1]), float(d[2]))


def transform_to(t: Transform) -> dict:
    return {
        "translation": vec3_to(t.translation),
        "rotation": [t.rotation.w, t.rotation.x, t.rotation.y, t.rotation.z],
        "scale": vec3_to(t.scale),
    }


def transform_from(d: dict) -> Transform:
    r = d.get("rotation", [1.0, 0.0, 0.0, 0.0])
    w, x, y, z = (float(v) for v in r)
    try:
        # bit-exact load; stored rotations are already unit
        rotation = RotationQ(w, x, y, z)
    except ValueError:
        # hand-edited file with a denormalized rotation: repair it
        n = math.sqrt(w * w + x * x + y * y + z * z)
        if n == 0.0:
            raise ProjectError(f"zero rotation quaternion in {d!r}") from None
        rotation = RotationQ(w / n, x / n, y / n, z / n)
    return Transform(
        translation=vec3_from(d.get("translation", [0, 0, 0])),
        rotation=rotation,
        scale=vec3_from(d.get("scale", [1, 1, 1])),
    )


def geometry_to(g: ProxyGeometry) -> dict:
    if g.kind in ("box", "plane"):
        return {"kind": g.kind}
    return {
        "kind": "mesh",
        "vertices": [list(v) for v in g.vertices],
        "triangles": [list(t) for t in g.triangles],
        "vertex_colors": None if g.vertex_colors is None else [list(c) for c in g.vertex_colors],
    }


def geometry_from(d: dict) -> ProxyGeometry:
    if d["kind"] in ("box", "plane"):
        return ProxyGeometry(kind=d["kind"])
    return ProxyGeometry.mesh(d["vertices"], d["triangles"], d.get("vertex_colors"))


_ENTITY_KEYS = ("id", "name", "role", "geometry", "transform", "base_color",
                "movable", "character_profile_ref", "rig")


def entity_to(e: SceneEntity) -> dict:
    d = {
        "id": e.id,
        "name": e.name,
        "role": e.role,
        "geometry": geometry_to(e.geometry),
        "transform": transform_to(e.transform),
        "base_color": list(e.base_color),
        "movable": e.movable,
        "character_profile_ref": e.character_profile_ref,
        "rig": None if e.rig is None else {n: vec3_to(v) for n, v in e.rig.joints},
    }
    return d


def entity_from(d: dict, path: str, extras: list) -> SceneEntity:
    _split_extra(d, _ENTITY_KEYS, path, extras)
    rig = d.get("rig")
    return SceneEntity(
        id=d["id"],
        name=d.get("name", ""),
        role=d.get("role", "prop"),
        geometry=geometry_from(d["geometry"]),
        transform=transform_from(d["transform"]),
        base_color=tuple(d["base_color"]),
        movable=bool(d.get("movable", False)),
        character_profile_ref=d.get("character_profile_ref"),
        rig=None if rig is None else CanonicalRig(
            joints=tuple(sorted((n, vec3_from(v)) for n, v in rig.items()))
        ),
    )


_CAMERA_KEYS = ("id", "transform", "fov_deg", "near", "far", "label")
_LIGHT_KEYS = ("id", "kind", "color", "intensity", "transform")
_SCENE_KEYS = ("id", "entities", "cameras", "lights", "backdrop_color")


def scene_to(s: Scene) -> dict:
    return {
        "id": s.id,
        "entities": [entity_to(e) for e in s.entities],
        "cameras": [
            {"id": c.id, "transform": transform_to(c.transform), "fov_deg": c.fov_deg,
             "near": c.near, "far": c.far, "label": c.label}
            for c in s.cameras
        ],
        "lights": [
            {"id": l.id, "kind": l.kind, "color": list(l.color), "intensity": l.intensity,
             "transform": transform_to(l.transform)}
            for l in s.lights
        ],
        "backdrop_color": list(s.backdrop_color),
    }


def scene_from(d: dict, extras: list) -> Scene:
    path = f"scene:{d['id']}"
    _split_extra(d, _SCENE_KEYS, path, extras)
    cams = []
    for c in d.get("cameras", []):
        _split_extra(c, _CAMERA_KEYS, f"{path}/camera:{c['id']}", extras)
        cams.append(Camera(
            id=c["id"], transform=transform_from(c["transform"]), fov_deg=float(c["fov_deg"]),
            near=float(c["near"]), far=float(c["far"]), label=c.get("label", ""),
        ))
    lights = []
    for l in d.get("lights", []):
        _split_extra(l, _LIGHT_KEYS, f"{path}/light:{l['id']}", extras)
        lights.append(Light(
            id=l["id"], kind=l["kind"], color=tuple(l["color"]), intensity=float(l["intensity"]),
            transform=transform_from(l["transform"]),
        ))
    return Scene(
        id=d["id"],
        entities=tuple(entity_from(e, f"{path}/entity:{e['id']}", extras) for e in d.get("entities", [])),
        cameras=tuple(cams),
        lights=tuple(lights),
        backdrop_color=tuple(d.get("backdrop_color", (0.12, 0.12, 0.14))),
    )


def _key_value_to(prop: str, v) -> object:
    if prop == "transform":
        return transform_to(v)
    if prop == "color":
        return list(v)
    return float(v)


def _key_value_from(prop: str, v):
    if prop == "transform":
        return transform_from(v)
    if prop == "color":
        return tuple(v)
    return float(v)


_TRACK_KEYS = ("id", "kind", "target_id", "prop", "keyframes", "motion_paths")
_CLIP_KEYS = ("id", "camera_id", "t_in", "t_out", "fps",
              "attached_style_image", "attached_video_result", "status")


def track_to(tr: Track) -> dict:
    return {
        "id": tr.id,
        "kind": tr.kind,
        "target_id": tr.target_id,
        "prop": tr.prop,
        "keyframes": [
            {"t": k.t, "value": _key_value_to(tr.prop, k.value), "easing": k.easing}
            for k in tr.keyframes
        ],
        "motion_paths": [
            {
                "entity_id": p.entity_id,
                "source": p.source,
                "samples": [[t, vec3_to(pos), yaw] for t, pos, yaw in p.samples],
            }
            for p in tr.motion_paths
        ],
    }


def track_from(d: dict, path: str, extras: list) -> Track:
    _split_extra(d, _TRACK_KEYS, path, extras)
    prop = d.get("prop", "transform")
    return Track(
        id=d["id"],
        kind=d["kind"],
        target_id=d["target_id"],
        prop=prop,
        keyframes=tuple(
            Keyframe(t=float(k["t"]), value=_key_value_from(prop, k["value"]), easing=k.get("easing", "linear"))
            for k in d.get("keyframes", [])
        ),
        motion_paths=tuple(
            MotionPath(
                entity_id=p["entity_id"],
                source=p.get("source", "authored"),
                samples=tuple((float(t), vec3_from(pos), float(yaw)) for t, pos, yaw in p["samples"]),
            )
            for p in d.get("motion_paths", [])
        ),
    )


def clip_to(c: Clip) -> dict:
    return {
        "id": c.id, "camera_id": c.camera_id, "t_in": c.t_in, "t_out": c.t_out, "fps": c.fps,
        "attached_style_image": c.attached_style_image,
        "attached_video_result": c.attached_video_result,
        "status": c.status,
    }


def clip_from(d: dict, path: str, extras: list) -> Clip:
    _split_extra(d, _CLIP_KEYS, path, extras)
    return Clip(
        id=d["id"], camera_id=d["camera_id"], t_in=float(d["t_in"]), t_out=float(d["t_out"]),
        fps=int(d.get("fps", 16)),
        attached_style_image=d.get("attached_style_image"),
        attached_video_result=d.get("attached_video_result"),
        status=d.get("status", "draft"),
    )


def timeline_to(t: Timeline) -> dict:
    return {
        "scene_id": t.scene_id,
        "tracks": [track_to(tr) for tr in t.tracks],
        "clips": [clip_to(c) for c in t.clips],
    }


def timeline_from(d: dict, extras: list) -> Timeline:
    path = f"timeline:{d['scene_id']}"
    _split_extra(d, ("scene_id", "tracks", "clips"), path, extras)
    return Timeline(
        scene_id=d["scene_id"],
        tracks=tuple(track_from(tr, f"{path}/track:{tr['id']}", extras) for tr in d.get("tracks", [])),
        clips=tuple(clip_from(c, f"{path}/clip:{c['id']}", extras) for c in d.get("clips", [])),
    )


def profile_to(p: CharacterProfile) -> dict:
    return {
        "character_id": p.character_id, "display_name": p.display_name,
        "identity_prompt": p.identity_prompt, "lora_ref": p.lora_ref, "lora_weight": p.lora_weight,
    }


def profile_from(d: dict) -> CharacterProfile:
    return CharacterProfile(
        character_id=d["character_id"], display_name=d.get("display_name", d["character_id"]),
        identity_prompt=d.get("identity_prompt", ""), lora_ref=d.get("lora_ref"),
        lora_weight=float(d.get("lora_weight", 0.8)),
    )


_PROJECT_KEYS = ("id", "name", "scenes", "timelines", "skeletons", "video_tracks",
                 "profiles", "style_registry", "history", "schema_version")


def project_to_dict(p: Project) -> dict:
    d = {
        "id": p.id,
        "name": p.name,
        "scenes": [scene_to(s) for s in p.scenes],
        "timelines": [timeline_to(t) for t in p.timelines],
        "skeletons": {name: dump_document(seq) for name, seq in p.skeletons},
        "video_tracks": [
            {"id": v.id, "scene_id": v.scene_id, "skeleton_name": v.skeleton_name, "t0": v.t0}
            for v in p.video_tracks
        ],
        "profiles": [profile_to(pr) for pr in p.profiles],
        "style_registry": dump_registry(p.registry),
        "history": [
            {"job": h.job.to_dict(), "clip_id": h.clip_id, "label": h.label, "superseded": h.superseded}
            for h in p.history
        ],
        "schema_version": p.schema_version,
    }
    extras = dict(p.extras)
    if "project" in extras:
        d.update(json.loads(extras["project"]))
    # re-inject nested unknowns
    for s in d["scenes"]:
        _reinject(s, f"scene:{s['id']}", extras)
        for e in s["entities"]:
            _reinject(e, f"scene:{s['id']}/entity:{e['id']}", extras)
        for c in s["cameras"]:
            _reinject(c, f"scene:{s['id']}/camera:{c['id']}", extras)
        for l in s["lights"]:
            _reinject(l, f"scene:{s['id']}/light:{l['id']}", extras)
    for t in d["timelines"]:
        _reinject(t, f"timeline:{t['scene_id']}", extras)
        for tr in t["tracks"]:
            _reinject(tr, f"timeline:{t['scene_id']}/track:{tr['id']}", extras)
        for c in t["clips"]:
            _reinject(c, f"timeline:{t['scene_id']}/clip:{c['id']}", extras)
    return d


def _reinject(d: dict, path: str, extras: dict[str, str]) -> None:
    if path in extras:
        d.update(json.loads(extras[path]))


def project_from_dict(d: dict) -> Project:
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"file is {version!r}, this build loads {SCHEMA_VERSION!r}")
    extras: list[tuple[str, str]] = []
    _split_extra(d, _PROJECT_KEYS, "project", extras)
    scenes = tuple(scene_from(s, extras) for s in d.get("scenes", []))
    timelines = tuple(timeline_from(t, extras) for t in d.get("timelines", []))
    skeletons = tuple(
        (name, parse_document(doc).sequence) for name, doc in sorted(d.get("skeletons", {}).items())
    )
    registry = parse_registry(d["style_registry"]) if d.get("style_registry") else default_registry()
    history = tuple(
        HistoryEntry(
            job=JobRecord.from_dict(h["job"]),
            clip_id=h.get("clip_id"),
            label=h.get("label", ""),
            superseded=bool(h.get("superseded", False)),
        )
        for h in d.get("history", [])
    )
    return Project(
        id=d["id"],
        name=d.get("name", d["id"]),
        scenes=scenes,
        timelines=timelines,
        skeletons=skeletons,
        video_tracks=tuple(
            VideoTrackRef(id=v["id"], scene_id=v["scene_id"],
                          skeleton_name=v["skeleton_name"], t0=float(v.get("t0", 0.0)))
            for v in d.get("video_tracks", [])
        ),
        profiles=tuple(profile_from(pr) for pr in d.get("profiles", [])),
        registry=registry,
        history=history,
        schema_version=version,
        extras=tuple(sorted(extras)),
    )


# ---------------------------------------------------------------------------
# File form


def _canonical(d: dict) -> str:
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def save_project(project: Project, path) -> Path:
    body = project_to_dict(project)
    doc = {
        "schema": SCHEMA_VERSION,
        "checksum": hashlib.sha256(_canonical(body).encode("utf-8")).hexdigest(),
        "project": body,
    }
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def load_project(path) -> Project:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"unparseable project file: {exc}") from None
    if not isinstance(doc, dict) or "project" not in doc or "checksum" not in doc:
        raise CorruptFile("project file missing required envelope fields")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"file is {doc.get('schema')!r}, this build loads {SCHEMA_VERSION!r}")
    body = doc["project"]
    digest = hashlib.sha256(_canonical(body).encode("utf-8")).hexdigest()
    if digest != doc["checksum"]:
        raise CorruptFile("checksum mismatch: file was truncated or edited")
    return project_from_dict(body)


def validate_project(project: Project) -> list[str]:
    """Referential-integrity problems; empty means consistent."""
    problems = []
    scene_ids = {s.id for s in project.scenes}
    for t in project.timelines:
        if t.scene_id not in scene_ids:
            problems.append(f"timeline references missing scene {t.scene_id!r}")
            continue
        try:
            validate_timeline(t, project.scene(t.scene_id))
        except Exception as exc:
            problems.append(f"timeline {t.scene_id!r}: {exc}")
    profile_ids = {p.character_id for p in project.profiles}
    for s in project.scenes:
        for e in s.entities:
            if e.character_profile_ref and e.character_profile_ref not in profile_ids:
                problems.append(f"entity {e.id!r} references missing profile {e.character_profile_ref!r}")
    return problems
