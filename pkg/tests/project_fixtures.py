"""Seeded random project builder for persistence property tests."""
from __future__ import annotations

import random

from previz.gateway import JobRecord
from previz.geometry import RotationQ, Transform, Vec3
from previz.project import HistoryEntry, Project, VideoTrackRef
from previz.scene import Camera, Light, ProxyGeometry, Scene, SceneEntity
from previz.pose_overlay import humanoid_rig
from previz.styling import CharacterProfile
from previz.timeline import Clip, Keyframe, MotionPath, Timeline, Track

from skeleton_fixtures import dialogue_sequence


def _rand_transform(rng: random.Random) -> Transform:
    axis = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
    if axis.norm() == 0:
        axis = Vec3(0, 1, 0)
    return Transform(
        translation=Vec3(rng.uniform(-9, 9), rng.uniform(0, 4), rng.uniform(-9, 9)),
        rotation=RotationQ.from_axis_angle(axis, rng.uniform(-3.1, 3.1)),
        scale=Vec3(rng.uniform(0.2, 3), rng.uniform(0.2, 3), rng.uniform(0.2, 3)),
    )


def _rand_color(rng):
    return (rng.random(), rng.random(), rng.random())


def _rand_scene(rng: random.Random, idx: int) -> Scene:
    entities = []
    for i in range(rng.randint(1, 6)):
        kind = rng.choice(["box", "plane", "mesh"])
        if kind == "mesh":
            verts = [(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(4)]
            geom = ProxyGeometry.mesh(verts, [(0, 1, 2), (1, 2, 3)])
        else:
            geom = ProxyGeometry(kind=kind)
        role = rng.choice(["prop", "character", "set-piece"])
        entities.append(SceneEntity(
            id=f"e{idx}-{i}",
            name=f"entity {i}",
            role=role,
            geometry=geom,
            transform=_rand_transform(rng),
            base_color=_rand_color(rng),
            movable=rng.random() < 0.5,
            rig=humanoid_rig(rng.uniform(1.4, 2.0)) if role == "character" and rng.random() < 0.5 else None,
        ))
    cameras = tuple(
        Camera(id=f"cam{idx}-{i}", transform=_rand_transform(rng),
               fov_deg=rng.uniform(20, 100), near=0.1, far=rng.uniform(50, 300))
        for i in range(rng.randint(1, 3))
    )
    lights = tuple(
        Light(id=f"l{idx}-{i}", kind=rng.choice(["ambient", "directional", "point"]),
              color=_rand_color(rng), intensity=rng.uniform(0, 2), transform=_rand_transform(rng))
        for i in range(rng.randint(1, 3))
    )
    return Scene(
        id=f"scene{idx}",
        entities=tuple(entities),
        cameras=cameras,
        lights=lights,
        backdrop_color=_rand_color(rng),
    )


def _rand_timeline(rng: random.Random, scene: Scene) -> Timeline:
    tracks = []
    cam = scene.cameras[0]
    n_kf = rng.randint(2, 5)
    times = sorted(rng.sample([round(0.25 * k, 2) for k in range(20)], n_kf))
    tracks.append(Track(
        id=f"tr-cam-{scene.id}",
        kind="camera",
        target_id=cam.id,
        prop="transform",
        keyframes=tuple(
            Keyframe(t=t, value=_rand_transform(rng), easing=rng.choice(["linear", "ease-in-out"]))
            for t in times
        ),
    ))
    movable = [e for e in scene.entities if e.movable]
    if movable:
        ent = rng.choice(movable)
        t0 = round(rng.uniform(0, 1), 2)
        samples = []
        t = t0
        for _ in range(rng.randint(2, 6)):
            samples.append((round(t, 4), Vec3(rng.uniform(-5, 5), 0, rng.uniform(-5, 5)), rng.uniform(-3, 3)))
            t += rng.uniform(0.2, 1.0)
        tracks.append(Track(
            id=f"tr-path-{scene.id}",
            kind="element-animation",
            target_id=ent.id,
            prop="transform",
            motion_paths=(MotionPath(entity_id=ent.id, samples=tuple(samples), source="recorded"),),
        ))
    lights = list(scene.lights)
    if lights and rng.random() < 0.7:
        light = rng.choice(lights)
        tracks.append(Track(
            id=f"tr-fade-{scene.id}",
            kind="fixed-element",
            target_id=light.id,
            prop="intensity",
            keyframes=(Keyframe(t=0.0, value=rng.uniform(0, 2)), Keyframe(t=2.0, value=rng.uniform(0, 2))),
        ))
    clips = []
    t = 0.0
    for i in range(rng.randint(1, 3)):
        dur = round(rng.uniform(0.5, 3.0), 2)
        clips.append(Clip(
            id=f"clip-{scene.id}-{i}",
            camera_id=rng.choice(scene.cameras).id,
            t_in=round(t, 2),
            t_out=round(t + dur, 2),
            fps=rng.choice([8, 16, 24]),
            status=rng.choice(["draft", "rendered", "submitted", "generated", "failed"]),
        ))
        t += dur + rng.uniform(0.0, 1.0)
    return Timeline(scene_id=scene.id, tracks=tuple(tracks), clips=tuple(clips))


def random_project(seed: int) -> Project:
    rng = random.Random(seed)
    project = Project(id=f"proj-{seed}", name=f"random project {seed}")
    for idx in range(rng.randint(1, 3)):
        scene = _rand_scene(rng, idx)
        project = project.with_scene(scene)
        if rng.random() < 0.8:
            project = project.with_timeline(_rand_timeline(rng, scene))
    if rng.random() < 0.6:
        project = project.with_skeleton("dlg", dialogue_sequence(n_frames=rng.randint(2, 12)))
        project = project.with_video_track(VideoTrackRef(
            id="vt-0", scene_id=project.scenes[0].id, skeleton_name="dlg", t0=rng.uniform(0, 2)))
    for i in range(rng.randint(0, 3)):
        project = project.with_profile(CharacterProfile(
            character_id=f"char{i}",
            display_name=f"Character {i}",
            identity_prompt=f"identity prompt {i}",
            lora_ref=f"lora-{i}" if rng.random() < 0.7 else None,
            lora_weight=round(rng.uniform(0.1, 1.0), 3),
        ))
    if rng.random() < 0.5:
        project = project.with_history(HistoryEntry(
            job=JobRecord(job_id=f"job{seed}", kind="image", status="done", progress=1.0,
                          submitted_at=1700000000.0 + seed),
            clip_id=None,
            label="restyle",
            superseded=rng.random() < 0.3,
        ))
    return project
