"""Builds the demo project: a dim hideout where a conspirator walks over
to a hacker working at a glowing terminal.

Two cameras cover the scene (an over-the-shoulder shot that tracks the
walk, and a wide two-shot), the conspirator's walk is a recorded WASD
motion path, and one 2-second clip at 16 fps is ready to render. Every
value is fixed so renders and stub generations are reproducible.
"""
from __future__ import annotations

from .geometry import RotationQ, Transform, Vec3
from .pose_overlay import humanoid_rig
from .recording import InputEvent, record_motion_path
from .scene import Camera, Light, ProxyGeometry, Scene, SceneEntity
from .styling import CharacterProfile
from .timeline import Clip, Keyframe, Timeline, Track, add_keyframe, attach_motion_path
from .project import Project

DEMO_PROJECT_ID = "hideout-pitch"
DEMO_SCENE_ID = "hideout"
DEMO_CLIP_ID = "c1"
DEMO_CAMERA_OTS = "cam-ots"
DEMO_CAMERA_WIDE = "cam-wide"

DEMO_PROMPT_FIELDS = {
    "style": "Cinematic",
    "mood_tone": "tense",
    "genre": "thriller",
    "background_description": "a dim hideout lit by a single monitor, cables on the floor",
}
DEMO_MOTION_PROMPT = "a man walks toward a woman typing at a desktop computer and speaks to her"


def standing_box(width: float, height: float, depth: float) -> ProxyGeometry:
    """Box with its origin at the feet (base center), for characters whose
    motion paths and rigs are ground-anchored."""
    hw, hd = width / 2.0, depth / 2.0
    verts = [
        (-hw, 0.0, -hd), (hw, 0.0, -hd), (hw, 0.0, hd), (-hw, 0.0, hd),
        (-hw, height, -hd), (hw, height, -hd), (hw, height, hd), (-hw, height, hd),
    ]
    tris = [
        (0, 2, 1), (0, 3, 2),  # bottom
        (4, 5, 6), (4, 6, 7),  # top
        (0, 1, 5), (0, 5, 4),  # -z
        (2, 3, 7), (2, 7, 6),  # +z
        (1, 2, 6), (1, 6, 5),  # +x
        (3, 0, 4), (3, 4, 7),  # -x
    ]
    return ProxyGeometry.mesh(verts, tris)


def _box(eid, name, pos, scale, color, role="prop", movable=False, yaw=0.0):
    return SceneEntity(
        id=eid,
        name=name,
        role=role,
        geometry=ProxyGeometry.box(),
        transform=Transform(
            translation=Vec3(*pos),
            rotation=RotationQ.yaw(yaw),
            scale=Vec3(*scale),
        ),
        base_color=color,
        movable=movable,
    )


def demo_scene() -> Scene:
    floor = SceneEntity(
        id="floor",
        name="floor",
        role="set-piece",
        geometry=ProxyGeometry.plane(),
        transform=Transform(scale=Vec3(14.0, 1.0, 14.0)),
        base_color=(0.16, 0.16, 0.18),
    )
    back_wall = _box("wall-back", "back wall", (0, 1.5, -6.0), (14.0, 3.0, 0.2), (0.13, 0.14, 0.2))
    side_wall = _box("wall-side", "side wall", (-5.0, 1.5, -1.0), (0.2, 3.0, 10.0), (0.12, 0.13, 0.18))
    desk = _box("desk", "desk", (0.0, 0.4, -4.2), (1.8, 0.8, 0.8), (0.35, 0.24, 0.16))
    monitor = _box("monitor", "monitor", (0.0, 1.05, -4.35), (0.7, 0.45, 0.08), (0.55, 0.75, 0.95))

    hacker = SceneEntity(
        id="hacker",
        name="hacker",
        role="character",
        geometry=standing_box(0.5, 1.65, 0.4),
        transform=Transform(translation=Vec3(0.0, 0.0, -3.4)),
        base_color=(0.75, 0.6, 0.5),
        movable=False,
        character_profile_ref="hacker",
        rig=humanoid_rig(1.65),
    )
    conspirator = SceneEntity(
        id="conspirator",
        name="conspirator",
        role="character",
        geometry=standing_box(0.55, 1.78, 0.45),
        transform=Transform(translation=Vec3(2.6, 0.0, -3.0)),
        base_color=(0.4, 0.45, 0.55),
        movable=True,
        character_profile_ref="conspirator",
        rig=humanoid_rig(1.78),
    )

    cameras = (
        # behind the hacker's shoulder, catching the conspirator's approach
        Camera(
            id=DEMO_CAMERA_OTS,
            transform=Transform(
                translation=Vec3(0.55, 1.75, -1.0),
                rotation=RotationQ.yaw(-0.1) * RotationQ.from_axis_angle(Vec3(1, 0, 0), -0.13),
            ),
            fov_deg=50.0,
            near=0.1,
            far=60.0,
            label="ots",
        ),
        Camera.preset(
            DEMO_CAMERA_WIDE,
            "wide-24mm",
            transform=Transform(
                translation=Vec3(3.4, 2.0, 1.2),
                rotation=RotationQ.yaw(0.55) * RotationQ.from_axis_angle(Vec3(1, 0, 0), -0.14),
            ),
            near=0.1,
            far=60.0,
        ),
    )
    lights = (
        Light(id="room-ambient", kind="ambient", color=(0.65, 0.68, 0.8), intensity=0.22),
        Light(
            id="monitor-glow",
            kind="point",
            color=(0.45, 0.75, 1.0),
            intensity=0.9,
            transform=Transform.at(0.0, 1.1, -4.0),
        ),
        Light(
            id="street-spill",
            kind="directional",
            color=(0.9, 0.7, 0.5),
            intensity=0.25,
            transform=Transform(rotation=RotationQ.from_axis_angle(Vec3(1, 0.3, 0), -0.9)),
        ),
    )
    return Scene(
        id=DEMO_SCENE_ID,
        entities=(floor, back_wall, side_wall, desk, monitor, hacker, conspirator),
        cameras=cameras,
        lights=lights,
        backdrop_color=(0.05, 0.05, 0.08),
    )


def conspirator_walk_events() -> list[InputEvent]:
    """Cross right-to-left toward the hacker, pushing slightly deeper."""
    return [
        InputEvent(t=0.0, key="a", pressed=True),
        InputEvent(t=0.9, key="w", pressed=True),
        InputEvent(t=1.4, key="w", pressed=False),
        InputEvent(t=1.7, key="a", pressed=False),
    ]


def demo_timeline(scene: Scene) -> Timeline:
    path = record_motion_path(
        conspirator_walk_events(),
        speed=1.3,
        entity_id="conspirator",
        start=Vec3(2.6, 0.0, -3.0),
    )
    walk = attach_motion_path(
        Track(id="conspirator-walk", kind="element-animation", target_id="conspirator", prop="transform"),
        path,
    )

    # the shoulder camera pushes in as the conspirator arrives
    pitch = RotationQ.from_axis_angle(Vec3(1, 0, 0), -0.13)
    cam_track = Track(id="ots-move", kind="camera", target_id=DEMO_CAMERA_OTS, prop="transform")
    cam_track = add_keyframe(cam_track, Keyframe(
        t=0.0,
        value=Transform(translation=Vec3(0.55, 1.75, -1.0), rotation=RotationQ.yaw(-0.1) * pitch),
        easing="ease-in-out",
    ))
    cam_track = add_keyframe(cam_track, Keyframe(
        t=2.0,
        value=Transform(translation=Vec3(0.42, 1.7, -1.5), rotation=RotationQ.yaw(-0.04) * pitch),
    ))
    lens = Track(id="ots-lens", kind="camera", target_id=DEMO_CAMERA_OTS, prop="fov")
    lens = add_keyframe(lens, Keyframe(t=0.0, value=50.0, easing="ease-in-out"))
    lens = add_keyframe(lens, Keyframe(t=2.0, value=42.0))

    glow = Track(id="glow-pulse", kind="fixed-element", target_id="monitor-glow", prop="intensity")
    glow = add_keyframe(glow, Keyframe(t=0.0, value=0.9))
    glow = add_keyframe(glow, Keyframe(t=2.0, value=1.15))

    return Timeline(
        scene_id=scene.id,
        tracks=(walk, cam_track, lens, glow),
        clips=(
            Clip(id=DEMO_CLIP_ID, camera_id=DEMO_CAMERA_OTS, t_in=0.0, t_out=2.0, fps=16),
            Clip(id="c2", camera_id=DEMO_CAMERA_WIDE, t_in=2.0, t_out=4.0, fps=16),
        ),
    )


def demo_profiles() -> tuple[CharacterProfile, ...]:
    return (
        CharacterProfile(
            character_id="hacker",
            display_name="Mara",
            identity_prompt="a focused woman in a worn hoodie typing fast, lit by her screen",
            lora_ref="lora-char-mara-v1",
            lora_weight=0.9,
        ),
        CharacterProfile(
            character_id="conspirator",
            display_name="Theo",
            identity_prompt="a tall man in a long coat, urgent expression",
            lora_ref="lora-char-theo-v1",
            lora_weight=0.85,
        ),
    )


def demo_project() -> Project:
    scene = demo_scene()
    project = Project(id=DEMO_PROJECT_ID, name="Hideout pitch")
    project = project.with_scene(scene)
    project = project.with_timeline(demo_timeline(scene))
    for profile in demo_profiles():
        project = project.with_profile(profile)
    return project
