import numpy as np
import pytest

from previz.geometry import Transform, Vec3
from previz.pose_overlay import (
    JOINT_NAMES,
    LIMB_COLORS,
    LIMBS,
    NoRig,
    humanoid_rig,
    project_rig,
    render_pose_overlay,
)
from previz.scene import CanonicalRig, Camera, SceneEntity
from previz.timeline import MotionPath


def centered_person():
    """Upright stick figure roughly filling the frame."""
    layout = {
        "nose": (0.50, 0.15), "neck": (0.50, 0.25),
        "right_shoulder": (0.42, 0.26), "right_elbow": (0.38, 0.40), "right_wrist": (0.36, 0.52),
        "left_shoulder": (0.58, 0.26), "left_elbow": (0.62, 0.40), "left_wrist": (0.64, 0.52),
        "right_hip": (0.46, 0.55), "right_knee": (0.45, 0.72), "right_ankle": (0.45, 0.90),
        "left_hip": (0.54, 0.55), "left_knee": (0.55, 0.72), "left_ankle": (0.55, 0.90),
        "right_eye": (0.47, 0.12), "left_eye": (0.53, 0.12),
        "right_ear": (0.44, 0.14), "left_ear": (0.56, 0.14),
    }
    return [layout[name] + (1.0,) for name in JOINT_NAMES]


class TestOverlay:
    def test_no_persons_black_frame(self):
        img = render_pose_overlay([], (64, 64))
        assert (img == 0).all()

    def test_all_17_limbs_drawn(self):
        img = render_pose_overlay([centered_person()], (256, 256))
        pixels = img.reshape(-1, 3)
        present = {tuple(c) for c in np.unique(pixels, axis=0)}
        for color in LIMB_COLORS:
            assert color in present, f"limb color {color} not drawn"

    def test_low_confidence_limbs_omitted_and_diff_localized(self):
        person = centered_person()
        full = render_pose_overlay([person], (256, 256))

        damped = list(person)
        arm = [JOINT_NAMES.index(n) for n in ("left_shoulder", "left_elbow", "left_wrist")]
        for j in arm:
            damped[j] = (person[j][0], person[j][1], 0.0)
        partial = render_pose_overlay([damped], (256, 256))

        # limbs incident to the dropped joints are the only difference
        diff = np.any(full != partial, axis=2)
        assert diff.any()
        xs = [person[j][0] * 256 for j in arm] + [person[JOINT_NAMES.index("neck")][0] * 256]
        ys = [person[j][1] * 256 for j in arm] + [person[JOINT_NAMES.index("neck")][1] * 256]
        pad = 8
        x0, x1 = min(xs) - pad, max(xs) + pad
        y0, y1 = min(ys) - pad, max(ys) + pad
        dy, dx = np.nonzero(diff)
        assert (dx >= x0).all() and (dx <= x1).all()
        assert (dy >= y0).all() and (dy <= y1).all()

    def test_confidence_floor_boundary(self):
        person = [(0.5, 0.5, 0.29)] * 18
        assert (render_pose_overlay([person], (64, 64)) == 0).all()
        person = [(0.5, 0.5, 0.3)] * 18
        assert (render_pose_overlay([person], (64, 64)) > 0).any()


class TestProjectRig:
    def test_root_at_image_center(self):
        rig = CanonicalRig(joints=tuple((n, Vec3(0, 0, 0)) for n in JOINT_NAMES))
        ent = SceneEntity(id="c", role="character", rig=rig, transform=Transform.at(0, 0, -4))
        cam = Camera(id="cam", fov_deg=60.0)
        pts = project_rig(ent, cam, viewport=(640, 360))
        for x, y, conf in pts:
            assert conf == 1.0
            assert x == pytest.approx(0.5) and y == pytest.approx(0.5)

    def test_requires_rig(self):
        ent = SceneEntity(id="p", role="prop")
        with pytest.raises(NoRig):
            project_rig(ent, Camera(id="cam"))

    def test_behind_camera_all_zero_confidence(self):
        ent = SceneEntity(
            id="c", role="character", rig=humanoid_rig(), transform=Transform.at(0, 0, 5)
        )
        pts = project_rig(ent, Camera(id="cam"))
        assert all(c == 0.0 for _, _, c in pts)

    def test_root_follows_motion_path_oracle(self):
        from previz.scene import project_point

        rig = CanonicalRig(joints=tuple((n, Vec3(0, 1.0, 0)) for n in JOINT_NAMES))
        ent = SceneEntity(id="c", role="character", rig=rig, movable=True)
        cam = Camera(id="cam", transform=Transform.at(0, 1.0, 6), fov_deg=70.0)
        path = MotionPath(
            entity_id="c",
            samples=((0.0, Vec3(-1, 0, 0), 0.0), (2.0, Vec3(1, 0, -2), 0.0)),
        )
        for k in range(9):
            t = k * 0.25
            pos, yaw = path.sample(t)
            pts = project_rig(ent, cam, entity_transform=Transform(translation=pos), viewport=(640, 360))
            expect = project_point(cam, pos + Vec3(0, 1.0, 0), (640, 360))
            assert expect is not None
            x, y, conf = pts[0]
            assert conf == 1.0
            assert x * 640 == pytest.approx(expect[0], abs=1e-9)
            assert y * 360 == pytest.approx(expect[1], abs=1e-9)

    def test_humanoid_rig_carries_all_joints(self):
        rig = humanoid_rig()
        assert set(rig.joint_map()) == set(JOINT_NAMES)
        assert len(LIMBS) == 17
