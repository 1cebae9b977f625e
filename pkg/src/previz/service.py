"""The /api/v1 HTTP service the authoring UI consumes.

Projects are held in memory as immutable values behind per-project locks;
every mutation carries the caller's base_version and is rejected with 409
when stale (optimistic concurrency, one version token per project).
Generation jobs run through the configured gateway (in-process stub by
default, previz-gen/1 remote when PREVIZ_GEN_BACKEND is a URL).
docs/api.md lists every endpoint.
"""
from __future__ import annotations

import asyncio
import json
import os
import threading
import uuid
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from fastapi import Body, FastAPI, HTTPException, Request, Response
from fastapi.responses import StreamingResponse

from .geometry import Vec3

from . import project as prj
from .assets import AssetRef, FileAssetStore, MemoryAssetStore, UnknownAsset
from .gateway import (
    GatewayError,
    ImageJobRequest,
    NotDone,
    StubGateway,
    UnknownJob,
    VideoJobRequest,
)
from .genwire import RemoteGateway
from .masks import masks_from_ids, rasterize_strokes
from .pose_overlay import render_pose_overlay, rig_overlay_for_frame
from .project import HistoryEntry, Project, ProjectError
from .raster import render_frame
from .raster_io import encode_png
from .recording import InputEvent, record_motion_path
from .scene import DuplicateId, SceneError, UnknownId, set_appearance
from .skeleton import (
    SkeletonError,
    SkeletonLayer,
    PersonPose,
    Placement,
    blend_with_blocking,
    crop,
    recomposite,
    split_layers,
    transform_layer,
)
from .skelio import dump_document, parse_document
from .styling import (
    GuidanceParams,
    PromptFields,
    ResemblanceLevel,
    StyleTag,
    StylingError,
    VideoGuidanceMode,
    assemble_regional,
    compose_prompt,
    resemblance_params,
    video_guidance,
)
from .timeline import (
    Timeline,
    TimelineError,
    add_clip,
    add_keyframe,
    add_track,
    attach_motion_path,
    compose_sequence,
    replace_track,
    update_clip,
)

API_PREFIX = "/api/v1"
BACKEND_ENV = "PREVIZ_GEN_BACKEND"
ASSET_DIR_ENV = "PREVIZ_ASSET_DIR"
PORT_ENV = "PREVIZ_PORT"


@dataclass
class ServiceConfig:
    asset_dir: Optional[str] = None
    backend: str = "stub"
    workers: int = 1
    latency_s: float = 0.0

    @staticmethod
    def from_env() -> "ServiceConfig":
        return ServiceConfig(
            asset_dir=os.environ.get(ASSET_DIR_ENV),
            backend=os.environ.get(BACKEND_ENV, "stub"),
        )


@dataclass
class _Slot:
    version: int
    project: Project
    lock: threading.Lock = field(default_factory=threading.Lock)


class ServiceState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = FileAssetStore(config.asset_dir) if config.asset_dir else MemoryAssetStore()
        if config.backend == "stub":
            self.gateway = StubGateway(self.store, workers=config.workers, latency_s=config.latency_s)
        else:
            self.gateway = RemoteGateway(config.backend, self.store)
        self.slots: dict[str, _Slot] = {}
        self.clip_jobs: dict[tuple[str, str], str] = {}
        self._registry_lock = threading.Lock()

    def slot(self, pid: str) -> _Slot:
        slot = self.slots.get(pid)
        if slot is None:
            raise HTTPException(404, f"no project {pid!r}")
        return slot

    def add_project(self, project: Project) -> _Slot:
        with self._registry_lock:
            slot = _Slot(version=1, project=project)
            self.slots[project.id] = slot
        return slot

    def mutate(self, pid: str, base_version: int, fn) -> tuple[int, Project]:
        slot = self.slot(pid)
        with slot.lock:
            if base_version != slot.version:
                raise HTTPException(
                    409,
                    detail={"error": "stale_version", "current": slot.version},
                )
            updated = fn(slot.project)
            slot.project = updated
            slot.version += 1
            return slot.version, updated


def _bad_request(exc: Exception) -> HTTPException:
    if isinstance(exc, (UnknownId, UnknownJob, UnknownAsset)):
        return HTTPException(404, str(exc))
    if isinstance(exc, DuplicateId):
        return HTTPException(409, str(exc))
    return HTTPException(400, str(exc))


_DOMAIN_ERRORS = (SceneError, TimelineError, SkeletonError, StylingError,
                  ProjectError, GatewayError, UnknownAsset, ValueError, KeyError)


def _require(payload: dict, *keys):
    out = []
    for k in keys:
        if k not in payload:
            raise HTTPException(400, f"missing field {k!r}")
        out.append(payload[k])
    return out[0] if len(out) == 1 else out


def _sniff_kind(data: bytes) -> str:
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return "image/png"
    if data[:6] in (b"GIF87a", b"GIF89a"):
        return "image/gif"
    return "application/octet-stream"


def _capture_frame(project: Project, scene_id: str, camera_id: Optional[str],
                   t: Optional[float], size: tuple[int, int], with_pose: bool = True):
    scene = project.scene(scene_id)
    state = None
    if t is not None:
        timeline = project.timeline(scene_id)
        fps = timeline.clips[0].fps if timeline.clips else 16
        plan = compose_sequence(scene, timeline, t, t + 1.0 / fps, fps)
        state = plan.frames[0]
        camera = scene.camera(camera_id) if camera_id else scene.camera(state.camera_id)
    else:
        camera = scene.camera(camera_id) if camera_id else scene.cameras[0]
    pose = None
    if state is not None:
        if with_pose:
            pose = rig_overlay_for_frame(scene, state, size)
        return render_frame(
            scene, camera, size,
            camera_transform=state.camera_transform if camera_id in (None, state.camera_id) else None,
            fov_deg=state.fov_deg if camera_id in (None, state.camera_id) else None,
            entity_transforms=state.entity_transform_map(),
            entity_colors=state.entity_color_map(),
            light_states=state.light_state_map(),
            pose=pose,
        ), state
    if with_pose:
        persons = []
        for entity in scene.entities:
            if entity.rig is not None:
                from .pose_overlay import project_rig

                persons.append(project_rig(entity, camera, viewport=size))
        pose = render_pose_overlay(persons, size) if persons else None
    return render_frame(scene, camera, size, pose=pose), None


def _store_frame(store, frame) -> dict[str, dict]:
    refs = {
        "color": store.put(encode_png(frame.color), "image/png").to_dict(),
        "depth": store.put(encode_png(frame.depth), "image/png").to_dict(),
        "id": store.put(encode_png(frame.id), "image/png").to_dict(),
    }
    if frame.pose is not None:
        refs["pose"] = store.put(encode_png(frame.pose), "image/png").to_dict()
    return refs


def _layer_to_dict(layer: SkeletonLayer) -> dict:
    return {
        "person_id": layer.person_id,
        "fps": layer.fps,
        "placement": {
            "translate": list(layer.placement.translate),
            "scale": layer.placement.scale,
            "anchor": list(layer.placement.anchor),
        },
        "frames": [
            None if f is None else [[x, y, c] for x, y, c in f.joints]
            for f in layer.frames
        ],
    }


def _layer_from_dict(d: dict) -> SkeletonLayer:
    pid = int(d["person_id"])
    pl = d.get("placement", {})
    return SkeletonLayer(
        person_id=pid,
        fps=float(d["fps"]),
        frames=tuple(
            None if f is None else PersonPose(
                person_id=pid, joints=tuple((float(x), float(y), float(c)) for x, y, c in f)
            )
            for f in d["frames"]
        ),
        placement=Placement(
            translate=tuple(pl.get("translate", (0.0, 0.0))),
            scale=float(pl.get("scale", 1.0)),
            anchor=tuple(pl.get("anchor", (0.5, 0.5))),
        ),
    )


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    state = ServiceState(config or ServiceConfig.from_env())
    app = FastAPI(title="previz", version="1")
    app.state.previz = state

    def fields_from(payload: dict, profiles) -> PromptFields:
        return PromptFields(
            style=StyleTag.parse(payload.get("style", "Cinematic")),
            mood_tone=payload.get("mood_tone", ""),
            genre=payload.get("genre", ""),
            background_description=payload.get("background_description", ""),
            characters=tuple(profiles),
            motion_prompt=payload.get("motion_prompt"),
        )

    @app.get(f"{API_PREFIX}/health")
    def health():
        return {"status": "ok", "backend": state.config.backend}

    # -- projects ----------------------------------------------------------

    @app.post(f"{API_PREFIX}/projects")
    def create_project(payload: dict = Body(...)):
        name = payload.get("name", "untitled")
        pid = payload.get("id") or uuid.uuid4().hex[:8]
        if pid in state.slots:
            raise HTTPException(409, f"project {pid!r} exists")
        if payload.get("demo"):
            from .walkthrough import demo_project

            project = demo_project()
            pid = project.id
            if pid in state.slots:
                raise HTTPException(409, f"project {pid!r} exists")
        else:
            project = Project(id=pid, name=name)
        slot = state.add_project(project)
        return {"project_id": project.id, "version": slot.version}

    @app.get(f"{API_PREFIX}/projects")
    def list_projects():
        return {
            "projects": [
                {"id": pid, "name": slot.project.name, "version": slot.version}
                for pid, slot in sorted(state.slots.items())
            ]
        }

    @app.get(f"{API_PREFIX}/projects/{{pid}}")
    def get_project(pid: str):
        slot = state.slot(pid)
        return {"version": slot.version, "project": prj.project_to_dict(slot.project)}

    @app.delete(f"{API_PREFIX}/projects/{{pid}}")
    def delete_project(pid: str):
        state.slot(pid)
        del state.slots[pid]
        return {"deleted": pid}

    @app.post(f"{API_PREFIX}/projects/{{pid}}/save")
    def save_project_endpoint(pid: str, payload: dict = Body(...)):
        slot = state.slot(pid)
        path = _require(payload, "path")
        out = prj.save_project(slot.project, path)
        return {"path": str(out), "version": slot.version}

    @app.post(f"{API_PREFIX}/projects/load")
    def load_project_endpoint(payload: dict = Body(...)):
        path = _require(payload, "path")
        try:
            project = prj.load_project(path)
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        if project.id in state.slots:
            del state.slots[project.id]
        slot = state.add_project(project)
        return {"project_id": project.id, "version": slot.version}

    @app.get(f"{API_PREFIX}/projects/{{pid}}/validate")
    def validate_endpoint(pid: str):
        problems = prj.validate_project(state.slot(pid).project)
        return {"ok": not problems, "problems": problems}

    # -- scene mutations ----------------------------------------------------

    def _mutation(pid: str, payload: dict, fn):
        base_version = _require(payload, "base_version")
        try:
            version, _ = state.mutate(pid, int(base_version), fn)
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        return {"version": version}

    @app.post(f"{API_PREFIX}/projects/{{pid}}/scenes")
    def add_scene(pid: str, payload: dict = Body(...)):
        scene_dict = _require(payload, "scene")
        return _mutation(pid, payload, lambda p: p.with_scene(prj.scene_from(scene_dict, [])))

    @app.post(f"{API_PREFIX}/projects/{{pid}}/scenes/{{sid}}/entities")
    def add_entity_endpoint(pid: str, sid: str, payload: dict = Body(...)):
        entity_dict = _require(payload, "entity")

        def fn(p: Project) -> Project:
            from .scene import add_entity

            scene, _ = add_entity(p.scene(sid), prj.entity_from(entity_dict, "tmp", []))
            return p.with_scene(scene)

        return _mutation(pid, payload, fn)

    @app.post(f"{API_PREFIX}/projects/{{pid}}/scenes/{{sid}}/cameras")
    def add_camera_endpoint(pid: str, sid: str, payload: dict = Body(...)):
        cam = _require(payload, "camera")

        def fn(p: Project) -> Project:
            from .scene import Camera, add_camera

            camera = Camera(
                id=cam["id"],
                transform=prj.transform_from(cam.get("transform", {})),
                fov_deg=float(cam.get("fov_deg", 39.6)),
                near=float(cam.get("near", 0.1)),
                far=float(cam.get("far", 200.0)),
                label=cam.get("label", ""),
            )
            return p.with_scene(add_camera(p.scene(sid), camera))

        return _mutation(pid, payload, fn)

    @app.post(f"{API_PREFIX}/projects/{{pid}}/scenes/{{sid}}/lights")
    def add_light_endpoint(pid: str, sid: str, payload: dict = Body(...)):
        light = _require(payload, "light")

        def fn(p: Project) -> Project:
            from .scene import Light, add_light

            obj = Light(
                id=light["id"],
                kind=light.get("kind", "ambient"),
                color=tuple(light.get("color", (1.0, 1.0, 1.0))),
                intensity=float(light.get("intensity", 1.0)),
                transform=prj.transform_from(light.get("transform", {})),
            )
            return p.with_scene(add_light(p.scene(sid), obj))

        return _mutation(pid, payload, fn)

    @app.patch(f"{API_PREFIX}/projects/{{pid}}/scenes/{{sid}}/appearance")
    def appearance_endpoint(pid: str, sid: str, payload: dict = Body(...)):
        target = _require(payload, "target_id")

        def fn(p: Project) -> Project:
            color = payload.get("color")
            scene = set_appearance(
                p.scene(sid),
                target,
                color=None if color is None else tuple(color),
                intensity=payload.get("intensity"),
            )
            return p.with_scene(scene)

        return _mutation(pid, payload, fn)

    @app.patch(f"{API_PREFIX}/projects/{{pid}}/scenes/{{sid}}/entities/{{eid}}/transform")
    def entity_transform_endpoint(pid: str, sid: str, eid: str, payload: dict = Body(...)):
        xf = _require(payload, "transform")

        def fn(p: Project) -> Project:
            from .scene import set_entity_transform

            return p.with_scene(set_entity_transform(p.scene(sid), eid, prj.transform_from(xf)))

        return _mutation(pid, payload, fn)

    @app.post(f"{API_PREFIX}/projects/{{pid}}/profiles")
    def add_profile_endpoint(pid: str, payload: dict = Body(...)):
        profile = _require(payload, "profile")
        return _mutation(pid, payload, lambda p: p.with_profile(prj.profile_from(profile)))

    # -- timeline mutations --------------------------------------------------

    @app.post(f"{API_PREFIX}/projects/{{pid}}/timelines")
    def add_timeline_endpoint(pid: str, payload: dict = Body(...)):
        scene_id = _require(payload, "scene_id")
        return _mutation(pid, payload, lambda p: p.with_timeline(Timeline(scene_id=scene_id)))

    @app.post(f"{API_PREFIX}/projects/{{pid}}/timelines/{{sid}}/tracks")
    def add_track_endpoint(pid: str, sid: str, payload: dict = Body(...)):
        track_dict = _require(payload, "track")

        def fn(p: Project) -> Project:
            track = prj.track_from(track_dict, "tmp", [])
            return p.with_timeline(add_track(p.timeline(sid), track))

        return _mutation(pid, payload, fn)

    @app.post(f"{API_PREFIX}/projects/{{pid}}/timelines/{{sid}}/tracks/{{tid}}/keyframes")
    def add_keyframe_endpoint(pid: str, sid: str, tid: str, payload: dict = Body(...)):
        kf = _require(payload, "keyframe")

        def fn(p: Project) -> Project:
            timeline = p.timeline(sid)
            track = timeline.track(tid)
            from .project import _key_value_from
            from .timeline import Keyframe

            new = add_keyframe(track, Keyframe(
                t=float(kf["t"]),
                value=_key_value_from(track.prop, kf["value"]),
                easing=kf.get("easing", "linear"),
            ))
            return p.with_timeline(replace_track(timeline, new))

        return _mutation(pid, payload, fn)

    @app.post(f"{API_PREFIX}/projects/{{pid}}/timelines/{{sid}}/tracks/{{tid}}/record")
    def record_endpoint(pid: str, sid: str, tid: str, payload: dict = Body(...)):
        events, speed = _require(payload, "events", "speed")

        def fn(p: Project) -> Project:
            timeline = p.timeline(sid)
            track = timeline.track(tid)
            start = payload.get("start")
            path = record_motion_path(
                [InputEvent(t=float(e["t"]), key=e["key"], pressed=bool(e["pressed"])) for e in events],
                speed=float(speed),
                entity_id=track.target_id,
                start=prj.vec3_from(start) if start else Vec3(),
            )
            return p.with_timeline(replace_track(timeline, attach_motion_path(track, path)))

        return _mutation(pid, payload, fn)

    @app.post(f"{API_PREFIX}/projects/{{pid}}/timelines/{{sid}}/clips")
    def add_clip_endpoint(pid: str, sid: str, payload: dict = Body(...)):
        clip_dict = _require(payload, "clip")

        def fn(p: Project) -> Project:
            return p.with_timeline(add_clip(p.timeline(sid), prj.clip_from(clip_dict, "tmp", [])))

        return _mutation(pid, payload, fn)

    @app.post(f"{API_PREFIX}/projects/{{pid}}/timelines/{{sid}}/clips/{{cid}}/attach")
    def attach_clip_result(pid: str, sid: str, cid: str, payload: dict = Body(...)):
        def fn(p: Project) -> Project:
            timeline = p.timeline(sid)
            clip = timeline.clip(cid)
            updates = {}
            if "style_image" in payload:
                updates["attached_style_image"] = payload["style_image"]
            if "video_result" in payload:
                updates["attached_video_result"] = payload["video_result"]
            if "status" in payload:
                updates["status"] = payload["status"]
            return p.with_timeline(update_clip(timeline, replace(clip, **updates)))

        return _mutation(pid, payload, fn)

    # -- capture & pure styling ops ------------------------------------------

    @app.post(f"{API_PREFIX}/projects/{{pid}}/capture")
    def capture_endpoint(pid: str, payload: dict = Body(...)):
        slot = state.slot(pid)
        scene_id = _require(payload, "scene_id")
        size = (int(payload.get("width", 320)), int(payload.get("height", 180)))
        try:
            frame, _ = _capture_frame(
                slot.project, scene_id,
                payload.get("camera_id"),
                payload.get("t"),
                size,
                with_pose=bool(payload.get("with_pose", True)),
            )
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        return {"refs": _store_frame(state.store, frame), "version": slot.version}

    @app.get(f"{API_PREFIX}/resemblance/{{level}}")
    def resemblance_endpoint(level: str, total_steps: int = 20):
        try:
            params = resemblance_params(ResemblanceLevel.parse(level), total_steps)
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        return params.to_dict()

    @app.post(f"{API_PREFIX}/prompt/compose")
    def compose_endpoint(payload: dict = Body(...)):
        profiles = [prj.profile_from(p) for p in payload.get("characters", [])]
        try:
            bundle = compose_prompt(
                fields_from(payload, profiles), seed=int(payload.get("seed", 0))
            )
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        return bundle.to_dict()

    @app.post(f"{API_PREFIX}/masks/strokes")
    def strokes_endpoint(payload: dict = Body(...)):
        width, height, strokes = _require(payload, "width", "height", "strokes")
        alpha = rasterize_strokes(int(width), int(height), strokes)
        ref = state.store.put(encode_png(alpha), "image/png")
        return {"ref": ref.to_dict()}

    # -- skeleton library ------------------------------------------------------

    @app.post(f"{API_PREFIX}/projects/{{pid}}/skeletons")
    def import_skeleton(pid: str, payload: dict = Body(...)):
        name, document = _require(payload, "name", "document")
        try:
            report = parse_document(document)
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        out = _mutation(pid, payload, lambda p: p.with_skeleton(name, report.sequence))
        out.update({
            "name": name,
            "frames": len(report.sequence.frames),
            "persons": report.sequence.person_ids(),
            "clamp_warnings": report.clamp_warnings,
            "assigned_ids": report.assigned_ids,
        })
        return out

    @app.get(f"{API_PREFIX}/projects/{{pid}}/skeletons")
    def list_skeletons(pid: str):
        slot = state.slot(pid)
        return {
            "skeletons": [
                {"name": n, "frames": len(s.frames), "fps": s.fps, "persons": s.person_ids()}
                for n, s in slot.project.skeletons
            ]
        }

    @app.get(f"{API_PREFIX}/projects/{{pid}}/skeletons/{{name}}")
    def get_skeleton(pid: str, name: str):
        slot = state.slot(pid)
        try:
            seq = slot.project.skeleton(name)
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        return {"name": name, "document": dump_document(seq)}

    @app.post(f"{API_PREFIX}/projects/{{pid}}/skeletons/{{name}}/crop")
    def crop_skeleton(pid: str, name: str, payload: dict = Body(...)):
        t0, t1, new_name = _require(payload, "t0", "t1", "new_name")

        def fn(p: Project) -> Project:
            return p.with_skeleton(new_name, crop(p.skeleton(name), float(t0), float(t1)))

        return _mutation(pid, payload, fn)

    @app.post(f"{API_PREFIX}/projects/{{pid}}/skeletons/{{name}}/split")
    def split_skeleton(pid: str, name: str):
        slot = state.slot(pid)
        try:
            layers = split_layers(slot.project.skeleton(name))
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        return {"layers": [_layer_to_dict(l) for l in layers]}

    @app.post(f"{API_PREFIX}/skeletons/transform")
    def transform_skeleton(payload: dict = Body(...)):
        layer_dict = _require(payload, "layer")
        try:
            layer = transform_layer(
                _layer_from_dict(layer_dict),
                translate=tuple(payload.get("translate", (0.0, 0.0))),
                scale=float(payload.get("scale", 1.0)),
                anchor=tuple(payload.get("anchor", (0.5, 0.5))),
            )
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        return {"layer": _layer_to_dict(layer), "out_of_frame_joints": layer.out_of_frame_joints()}

    @app.post(f"{API_PREFIX}/projects/{{pid}}/skeletons/recomposite")
    def recomposite_skeleton(pid: str, payload: dict = Body(...)):
        name, layers, fps, duration = _require(payload, "name", "layers", "fps", "duration")

        def fn(p: Project) -> Project:
            seq = recomposite(
                [_layer_from_dict(l) for l in layers],
                fps=float(fps),
                duration=float(duration),
                source_size=tuple(payload.get("source_size", (1920, 1080))),
            )
            return p.with_skeleton(name, seq)

        return _mutation(pid, payload, fn)

    @app.post(f"{API_PREFIX}/projects/{{pid}}/skeletons/blend")
    def blend_skeleton(pid: str, payload: dict = Body(...)):
        slot = state.slot(pid)
        layer_dict, scene_id, track_id, camera_id = _require(
            payload, "layer", "scene_id", "track_id", "camera_id")
        try:
            project = slot.project
            scene = project.scene(scene_id)
            timeline = project.timeline(scene_id)
            track = timeline.track(track_id)
            if not track.motion_paths:
                raise HTTPException(400, f"track {track_id!r} has no motion path")
            cam_track = next(
                (t for t in timeline.tracks
                 if t.kind == "camera" and t.target_id == camera_id and t.prop == "transform"),
                None,
            )
            # anchor at the entity's hip height when it has a rig
            root_offset = Vec3()
            entity = scene.entity(track.target_id)
            if entity.rig is not None:
                joints = entity.rig.joint_map()
                rh, lh = joints.get("right_hip"), joints.get("left_hip")
                if rh is not None and lh is not None:
                    root_offset = (rh + lh) * 0.5
            layer = blend_with_blocking(
                _layer_from_dict(layer_dict),
                track.motion_paths[-1],
                scene.camera(camera_id),
                camera_track=cam_track,
                fps=payload.get("fps"),
                root_offset=root_offset,
            )
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        return {"layer": _layer_to_dict(layer)}

    @app.post(f"{API_PREFIX}/projects/{{pid}}/skeletons/{{name}}/overlays")
    def skeleton_overlays(pid: str, name: str, payload: dict = Body(...)):
        slot = state.slot(pid)
        size = (int(payload.get("width", 320)), int(payload.get("height", 180)))
        try:
            seq = slot.project.skeleton(name)
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        refs = []
        for frame in seq.frames:
            img = render_pose_overlay([p.joints for p in frame.persons], size)
            refs.append(state.store.put(encode_png(img), "image/png").to_dict())
        return {"refs": refs, "fps": seq.fps}

    # -- video tracks (skeleton guidance dropped onto the timeline) -----------

    @app.post(f"{API_PREFIX}/projects/{{pid}}/video-tracks")
    def add_video_track(pid: str, payload: dict = Body(...)):
        scene_id, skeleton_name = _require(payload, "scene_id", "skeleton_name")

        def fn(p: Project) -> Project:
            p.scene(scene_id)
            p.skeleton(skeleton_name)
            entry = prj.VideoTrackRef(
                id=payload.get("id") or f"vt-{len(p.video_tracks)}",
                scene_id=scene_id,
                skeleton_name=skeleton_name,
                t0=float(payload.get("t0", 0.0)),
            )
            return p.with_video_track(entry)

        return _mutation(pid, payload, fn)

    @app.get(f"{API_PREFIX}/projects/{{pid}}/video-tracks")
    def list_video_tracks(pid: str):
        slot = state.slot(pid)
        return {
            "video_tracks": [
                {"id": v.id, "scene_id": v.scene_id, "skeleton_name": v.skeleton_name, "t0": v.t0}
                for v in slot.project.video_tracks
            ]
        }

    # -- generation jobs -------------------------------------------------------

    def _guidance_from(payload: dict) -> GuidanceParams:
        if "params" in payload:
            g = payload["params"]
            return GuidanceParams(
                total_steps=int(g["total_steps"]),
                skip_steps=int(g["skip_steps"]),
                control_strength=float(g["control_strength"]),
                use_latent_blend=bool(g["use_latent_blend"]),
            )
        level = ResemblanceLevel.parse(payload.get("level", "faithful"))
        return resemblance_params(level, int(payload.get("total_steps", 20)))

    @app.post(f"{API_PREFIX}/projects/{{pid}}/jobs/restyle")
    def restyle_job(pid: str, payload: dict = Body(...)):
        slot = state.slot(pid)
        scene_id = _require(payload, "scene_id")
        size = (int(payload.get("width", 320)), int(payload.get("height", 180)))
        try:
            project = slot.project
            scene = project.scene(scene_id)
            frame, _ = _capture_frame(project, scene_id, payload.get("camera_id"),
                                      payload.get("t"), size)
            character_ids = payload.get("character_ids")
            if character_ids is None:
                present = set(int(v) for v in np.unique(frame.id) if v)
                character_ids = [
                    e.id for e in scene.entities
                    if e.role == "character" and e.character_profile_ref
                    and frame.code_for(e.id) in present
                ]
            masks = masks_from_ids(
                frame, character_ids,
                expand_px=float(payload.get("expand_px", 15)),
                blur_sigma=float(payload.get("blur_sigma", 4.5)),
            )
            profiles = [project.profile(scene.entity(cid).character_profile_ref) for cid in character_ids]
            bundle = compose_prompt(
                fields_from(payload.get("fields", {}), profiles),
                seed=int(payload.get("seed", 0)),
            )
            params = _guidance_from(payload)
            regional = assemble_regional(masks, profiles, bundle, store=state.store,
                                         registry=project.registry)
            src_ref = state.store.put(encode_png(frame.color), "image/png")
            depth_ref = state.store.put(encode_png(frame.depth), "image/png")
            req = ImageJobRequest(
                source_color=src_ref,
                depth=depth_ref,
                regional=regional,
                bundle=bundle,
                params=params,
                output_size=size,
            )
            job_id = state.gateway.submit_image_job(req)
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        version = _append_history(pid, job_id, clip_id=payload.get("clip_id"), label="restyle")
        return {
            "job_id": job_id,
            "version": version,
            "params": params.to_dict(),
            "source_refs": {"color": src_ref.to_dict(), "depth": depth_ref.to_dict()},
        }

    @app.post(f"{API_PREFIX}/projects/{{pid}}/jobs/generate")
    def generate_job(pid: str, payload: dict = Body(...)):
        slot = state.slot(pid)
        scene_id, clip_id = _require(payload, "scene_id", "clip_id")
        size = (int(payload.get("width", 320)), int(payload.get("height", 180)))
        try:
            project = slot.project
            scene = project.scene(scene_id)
            timeline = project.timeline(scene_id)
            clip = timeline.clip(clip_id)
            plan = compose_sequence(scene, timeline, clip.t_in, clip.t_out, clip.fps)
            depth_refs, pose_refs = [], []
            for fs in plan.frames:
                pose = rig_overlay_for_frame(scene, fs, size)
                fr = render_frame(
                    scene, scene.camera(fs.camera_id), size,
                    camera_transform=fs.camera_transform, fov_deg=fs.fov_deg,
                    entity_transforms=fs.entity_transform_map(),
                    entity_colors=fs.entity_color_map(),
                    light_states=fs.light_state_map(),
                    pose=pose,
                )
                depth_refs.append(state.store.put(encode_png(fr.depth), "image/png"))
                pose_refs.append(state.store.put(
                    encode_png(fr.pose if fr.pose is not None else fr.color * 0), "image/png"))
            mode = VideoGuidanceMode(payload.get("mode", "resemble"))
            weight = video_guidance(mode, payload.get("weight"))
            profiles = [project.profile(p.character_id) for p in project.profiles]
            bundle = compose_prompt(
                fields_from(payload.get("fields", {}), profiles),
                seed=int(payload.get("seed", 0)),
            )
            ref_image = None
            if clip.attached_style_image and state.store.has(clip.attached_style_image):
                ref_image = AssetRef(hash=clip.attached_style_image, kind="image/png", size=0)
            req = VideoJobRequest(
                depth_refs=tuple(depth_refs),
                pose_refs=tuple(pose_refs),
                reference_image=ref_image,
                bundle=bundle,
                conditioning_weight=weight,
                fps=clip.fps,
                frame_count=len(plan.frames),
            )
            # clip re-edits cancel the previous submission
            old = state.clip_jobs.get((pid, clip_id))
            if old is not None and hasattr(state.gateway, "cancel"):
                rec = state.gateway.poll(old)
                if rec.status in ("queued", "running"):
                    state.gateway.cancel(old)
            job_id = state.gateway.submit_video_job(req)
            state.clip_jobs[(pid, clip_id)] = job_id
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        version = _append_history(pid, job_id, clip_id=clip_id, label="generate")
        return {"job_id": job_id, "version": version, "frame_count": len(plan.frames),
                "conditioning_weight": weight}

    def _append_history(pid: str, job_id: str, clip_id: Optional[str], label: str) -> int:
        slot = state.slot(pid)
        with slot.lock:
            rec = state.gateway.poll(job_id)
            history = []
            for h in slot.project.history:
                if clip_id is not None and h.clip_id == clip_id and h.label == label:
                    h = replace(h, superseded=True)
                history.append(h)
            history.append(HistoryEntry(job=rec, clip_id=clip_id, label=label))
            slot.project = replace(slot.project, history=tuple(history))
            slot.version += 1
            return slot.version

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}")
    def poll_job(job_id: str):
        try:
            return state.gateway.poll(job_id).to_dict()
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}/result")
    def job_result(job_id: str):
        try:
            refs = state.gateway.fetch_result(job_id)
        except NotDone as exc:
            raise HTTPException(409, str(exc))
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)
        return {"artifacts": {k: [r.to_dict() for r in v] for k, v in refs.items()}}

    @app.post(f"{API_PREFIX}/jobs/{{job_id}}/cancel")
    def cancel_job(job_id: str):
        if not hasattr(state.gateway, "cancel"):
            raise HTTPException(400, "backend does not support cancel")
        try:
            return state.gateway.cancel(job_id).to_dict()
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}/events")
    async def job_events(job_id: str):
        try:
            state.gateway.poll(job_id)
        except _DOMAIN_ERRORS as exc:
            raise _bad_request(exc)

        async def stream():
            while True:
                rec = state.gateway.poll(job_id)
                payload = {"status": rec.status, "progress": rec.progress, "error": rec.error}
                yield f"data: {json.dumps(payload)}\n\n"
                if rec.status in ("done", "failed"):
                    break
                await asyncio.sleep(0.02)

        return StreamingResponse(stream(), media_type="text/event-stream")

    # -- assets ----------------------------------------------------------------

    @app.get(f"{API_PREFIX}/assets/{{digest}}")
    def get_asset(digest: str):
        try:
            data = state.store.get(digest)
        except UnknownAsset as exc:
            raise HTTPException(404, str(exc))
        return Response(content=data, media_type=_sniff_kind(data))

    @app.post(f"{API_PREFIX}/assets")
    async def put_asset(request: Request):
        data = await request.body()
        if not data:
            raise HTTPException(400, "empty asset body")
        kind = request.query_params.get("kind") or _sniff_kind(data)
        return {"ref": state.store.put(data, kind).to_dict()}

    return app
