import math
import random

import pytest

from previz.geometry import Transform, Vec3
from previz.scene import Camera, project_point
from previz.skeleton import (
    EmptyRange,
    NoOverlap,
    NonPositiveScale,
    PersonPose,
    SkeletonFrame,
    SkeletonSequence,
    blend_with_blocking,
    crop,
    recomposite,
    sequence_equal,
    split_layers,
    transform_layer,
)
from previz.skelio import EmptySequence, SchemaError, dump_document, parse_document
from previz.timeline import MotionPath

from skeleton_fixtures import dialogue_sequence, standing_pose, untracked_document


@pytest.fixture
def dialogue():
    return dialogue_sequence()


class TestImport:
    def test_single_person_round_trip(self):
        seq = SkeletonSequence(
            fps=16.0,
            frames=tuple(
                SkeletonFrame(persons=(standing_pose(0, 0.5, 0.5),)) for _ in range(48)
            ),
            source_size=(640, 360),
        )
        report = parse_document(dump_document(seq))
        assert len(report.sequence.frames) == 48
        assert report.sequence.person_ids() == [0]
        assert report.clamp_warnings == 0
        assert sequence_equal(report.sequence, seq, tol=0.0)

    def test_out_of_range_coordinate_clamped_with_warning(self):
        seq = SkeletonSequence(
            fps=8.0, frames=(SkeletonFrame(persons=(standing_pose(0, 0.5, 0.5),)),)
        )
        doc = dump_document(seq).replace("frame 0\nperson 0 0.5", "frame 0\nperson 0 1.3", 1)
        report = parse_document(doc)
        assert report.clamp_warnings == 1
        assert report.sequence.frames[0].persons[0].joints[0][0] == 1.0

    def test_schema_errors(self):
        with pytest.raises(SchemaError):
            parse_document("not-a-skeleton\n")
        with pytest.raises(SchemaError):
            parse_document("previz-skel/1\nfps 16\nframes 2\nsource_size 64 64\nframe 0\nframe 0\n")

    def test_empty_sequence(self):
        with pytest.raises(EmptySequence):
            parse_document("previz-skel/1\nfps 16\nframes 0\nsource_size 64 64\n")

    def test_pose_estimator_client_parses_response(self, dialogue, monkeypatch):
        import httpx

        from previz.skelio import PoseEstimatorClient

        doc = dump_document(dialogue)

        def fake_post(url, **kwargs):
            assert kwargs["content"] == b"raw video bytes"
            return httpx.Response(200, text=doc, request=httpx.Request("POST", url))

        monkeypatch.setattr(httpx, "post", fake_post)
        report = PoseEstimatorClient("http://pose/extract").extract(b"raw video bytes")
        assert sequence_equal(report.sequence, dialogue, tol=0.0)

    def test_three_person_id_continuity(self, dialogue):
        report = parse_document(untracked_document(dialogue))
        seq = report.sequence
        assert seq.person_ids() == [0, 1, 2]
        # hand-labeled ground truth: match each recovered id to a source id
        # by first-frame root, then require it to hold on every frame
        mapping = {}
        for rec in seq.frames[0].persons:
            src = min(
                dialogue.frames[0].persons,
                key=lambda p: _root_dist(p, rec),
            )
            mapping[rec.person_id] = src.person_id
        assert sorted(mapping.values()) == [0, 1, 2]
        for fi, frame in enumerate(seq.frames):
            for rec in frame.persons:
                src = dialogue.frames[fi].person(mapping[rec.person_id])
                assert src is not None
                assert _root_dist(src, rec) < 1e-9


def _root_dist(a: PersonPose, b: PersonPose) -> float:
    ax, ay = a.root()
    bx, by = b.root()
    return math.hypot(ax - bx, ay - by)


class TestCrop:
    def test_full_range_identity(self, dialogue):
        assert sequence_equal(crop(dialogue, 0.0, dialogue.duration), dialogue, tol=0.0)

    def test_one_second_is_16_frames(self, dialogue):
        assert len(crop(dialogue, 0.0, 1.0).frames) == 16

    def test_compose_equals_direct(self, dialogue):
        a = crop(crop(dialogue, 0.25, 1.75), 0.5, 1.0)
        b = crop(dialogue, 0.75, min(1.75, 0.25 + 1.0))
        assert sequence_equal(a, b, tol=0.0)

    def test_empty_range(self, dialogue):
        with pytest.raises(EmptyRange):
            crop(dialogue, 1.0, 1.0)
        with pytest.raises(EmptyRange):
            crop(dialogue, 0.0, 99.0)


class TestSplitRecomposite:
    def test_single_person_single_layer(self):
        seq = SkeletonSequence(
            fps=16.0, frames=tuple(SkeletonFrame(persons=(standing_pose(0, 0.5, 0.5),)) for _ in range(8))
        )
        layers = split_layers(seq)
        assert len(layers) == 1 and layers[0].person_id == 0

    def test_split_recomposite_round_trip(self, dialogue):
        layers = split_layers(dialogue)
        assert len(layers) == 3
        rebuilt = recomposite(layers, dialogue.fps, dialogue.duration, dialogue.source_size)
        assert sequence_equal(rebuilt, dialogue, tol=1e-6)

    def test_partial_presence(self, dialogue):
        frames = []
        for i, f in enumerate(dialogue.frames):
            if 10 <= i <= 20:
                frames.append(f)
            else:
                frames.append(SkeletonFrame(persons=tuple(p for p in f.persons if p.person_id != 2)))
        seq = SkeletonSequence(fps=16.0, frames=tuple(frames), source_size=dialogue.source_size)
        layer2 = [l for l in split_layers(seq) if l.person_id == 2][0]
        for i, f in enumerate(layer2.frames):
            assert (f is not None) == (10 <= i <= 20)

    def test_identity_layer_recomposites_to_source(self):
        seq = dialogue_sequence(n_frames=8)
        layer = split_layers(seq)[0]
        solo = recomposite([layer], seq.fps, seq.duration, seq.source_size)
        for fa, fb in zip(solo.frames, seq.frames):
            assert len(fa.persons) == 1
            assert fa.persons[0].joints == fb.person(0).joints


class TestTransform:
    def test_identity_no_op(self, dialogue):
        layer = split_layers(dialogue)[0]
        same = transform_layer(layer)
        for a, b in zip(layer.frames, same.frames):
            assert (a is None) == (b is None)
            if a is not None:
                assert a.joints == b.joints

    def test_scale_about_hip_halves_distances(self, dialogue):
        layer = split_layers(dialogue)[1]
        pose = layer.frames[0]
        anchor = pose.root()
        scaled = transform_layer(layer, scale=0.5, anchor=anchor)
        a, b = pose.joints, scaled.frames[0].joints
        for (x1, y1, _), (x2, y2, _) in zip(a, b):
            d1 = math.hypot(x1 - anchor[0], y1 - anchor[1])
            d2 = math.hypot(x2 - anchor[0], y2 - anchor[1])
            assert d2 == pytest.approx(d1 * 0.5, abs=1e-12)

    def test_translate_shifts_and_flags(self, dialogue):
        layer = split_layers(dialogue)[1]  # person at x ~ 0.7
        moved = transform_layer(layer, translate=(0.25, 0.0))
        for orig, new in zip(layer.frames, moved.frames):
            if orig is None:
                continue
            for (x1, y1, c1), (x2, y2, c2) in zip(orig.joints, new.joints):
                assert x2 == pytest.approx(x1 + 0.25, abs=1e-12)
                assert y2 == y1 and c2 == c1
        assert moved.out_of_frame_joints() > 0

    def test_non_positive_scale(self, dialogue):
        layer = split_layers(dialogue)[0]
        with pytest.raises(NonPositiveScale):
            transform_layer(layer, scale=0.0)

    def test_similarity_preserves_distance_ratios(self):
        rng = random.Random(5)
        seq = dialogue_sequence(n_frames=4)
        base = split_layers(seq)[2]
        for _ in range(200):
            s = rng.uniform(0.2, 3.0)
            tr = (rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
            anchor = (rng.random(), rng.random())
            out = transform_layer(base, translate=tr, scale=s, anchor=anchor)
            p0, q0 = base.frames[0], out.frames[0]
            d_ab1 = _joint_dist(p0, 0, 10)
            d_cd1 = _joint_dist(p0, 4, 13)
            d_ab2 = _joint_dist(q0, 0, 10)
            d_cd2 = _joint_dist(q0, 4, 13)
            assert d_ab2 / d_cd2 == pytest.approx(d_ab1 / d_cd1, rel=1e-9)

    def test_placement_composes(self, dialogue):
        layer = split_layers(dialogue)[0]
        a = transform_layer(transform_layer(layer, scale=2.0, anchor=(0, 0)), translate=(0.1, 0.2))
        assert a.placement.scale == pytest.approx(2.0)
        # total map applied to a probe point matches the two-step result
        x, y = 0.3, 0.4
        s, (tx, ty), (ax, ay) = a.placement.scale, a.placement.translate, a.placement.anchor
        total = (ax + s * (x - ax) + tx, ay + s * (y - ay) + ty)
        two_step = (2.0 * x + 0.1, 2.0 * y + 0.2)
        assert total[0] == pytest.approx(two_step[0], abs=1e-12)
        assert total[1] == pytest.approx(two_step[1], abs=1e-12)


def _joint_dist(pose, i, j):
    x1, y1, _ = pose.joints[i]
    x2, y2, _ = pose.joints[j]
    return math.hypot(x1 - x2, y1 - y2)


class TestBlend:
    def make_camera(self):
        return Camera(id="cam", transform=Transform.at(0, 1.0, 6.0), fov_deg=70.0)

    def test_static_path_at_original_position_fixed_point(self):
        cam = self.make_camera()
        viewport = (1280, 720)
        world = Vec3(0.5, 1.0, -2.0)
        px, py, _ = project_point(cam, world, viewport)
        nx, ny = px / viewport[0], py / viewport[1]
        seq = SkeletonSequence(
            fps=16.0,
            frames=tuple(SkeletonFrame(persons=(standing_pose(0, nx, ny, scale=0.5),)) for _ in range(16)),
        )
        layer = split_layers(seq)[0]
        path = MotionPath(entity_id="e", samples=((0.0, world, 0.0), (1.0, world, 0.0)))
        out = blend_with_blocking(layer, path, cam, viewport=viewport)
        for a, b in zip(layer.frames, out.frames):
            for (x1, y1, _), (x2, y2, _) in zip(a.joints, b.joints):
                assert abs(x1 - x2) < 1e-6 and abs(y1 - y2) < 1e-6

    def test_walk_to_background_scales_down_monotonically(self):
        cam = self.make_camera()
        viewport = (1280, 720)
        # constant-size source person so any size change comes from depth
        seq = SkeletonSequence(
            fps=16.0,
            frames=tuple(
                SkeletonFrame(persons=(standing_pose(2, 0.5, 0.5, scale=0.6),)) for _ in range(32)
            ),
        )
        layer = split_layers(seq)[0]
        path = MotionPath(
            entity_id="e",
            samples=((0.0, Vec3(0, 1.0, -1.0), 0.0), (2.0, Vec3(0.5, 1.0, -9.0), 0.0)),
        )
        out = blend_with_blocking(layer, path, cam, viewport=viewport)
        # projection-ratio oracle: limb span shrinks as depth grows
        spans = []
        roots = []
        for i, f in enumerate(out.frames):
            t = i / 16.0
            pos, _ = path.sample(t)
            hit = project_point(cam, pos, viewport)
            assert hit is not None
            px, py, depth = hit
            rx, ry = f.root()
            assert rx == pytest.approx(px / viewport[0], abs=1e-9)
            assert ry == pytest.approx(py / viewport[1], abs=1e-9)
            spans.append(_joint_dist(f, 0, 13))
            roots.append(depth)
        for a, b in zip(spans, spans[1:]):
            assert b < a + 1e-12
        ratio_expect = roots[0] / roots[-1]
        ratio_got = spans[-1] / spans[0]
        assert ratio_got == pytest.approx(ratio_expect, rel=1e-9)

    def test_no_overlap(self):
        seq = dialogue_sequence(n_frames=8)
        layer = split_layers(seq)[0]
        path = MotionPath(entity_id="e", samples=((10.0, Vec3(), 0.0), (11.0, Vec3(1, 0, 0), 0.0)))
        with pytest.raises(NoOverlap):
            blend_with_blocking(layer, path, self.make_camera())
