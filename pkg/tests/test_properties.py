"""Hypothesis property tests for the cross-module invariants."""
import math

from hypothesis import given, settings
from hypothesis import strategies as st

from previz.geometry import RotationQ, Transform, slerp, smoothstep
from previz.styling import PromptFields, StyleTag, compose_prompt
from previz.timeline import Keyframe, Track, add_keyframe, sample_track


def unit_quats():
    return st.tuples(
        st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)
    ).filter(lambda q: math.hypot(*q) > 1e-3).map(
        lambda q: RotationQ(*(c / math.hypot(*q) for c in q))
    )


class TestRotationProperties:
    @given(unit_quats(), unit_quats(), st.floats(0, 1))
    @settings(max_examples=200, deadline=None)
    def test_slerp_output_is_unit(self, a, b, t):
        q = slerp(a, b, t)
        n = math.sqrt(q.w**2 + q.x**2 + q.y**2 + q.z**2)
        assert abs(n - 1.0) < 1e-9

    @given(unit_quats(), unit_quats())
    @settings(max_examples=200, deadline=None)
    def test_slerp_endpoints(self, a, b):
        assert slerp(a, b, 0.0).angle_to(a) < 1e-6
        assert slerp(a, b, 1.0).angle_to(b) < 1e-6

    @given(unit_quats(), unit_quats())
    @settings(max_examples=200, deadline=None)
    def test_slerp_midpoint_equidistant(self, a, b):
        mid = slerp(a, b, 0.5)
        assert abs(mid.angle_to(a) - mid.angle_to(b)) < 1e-6

    @given(unit_quats(), unit_quats(), st.floats(0.01, 0.99))
    @settings(max_examples=150, deadline=None)
    def test_track_rotation_continuity_geodesic(self, qa, qb, t):
        track = Track(id="r", kind="camera", target_id="c", prop="transform")
        track = add_keyframe(track, Keyframe(t=0.0, value=Transform(rotation=qa)))
        track = add_keyframe(track, Keyframe(t=1.0, value=Transform(rotation=qb)))
        eps = 1e-7
        r1 = sample_track(track, t).rotation
        r2 = sample_track(track, min(1.0, t + eps)).rotation
        # geodesic angle shrinks with the time step (continuity in t)
        assert r1.angle_to(r2) < 1e-4


class TestScalarProperties:
    @given(st.floats(-2, 3))
    def test_smoothstep_bounded_and_monotone(self, u):
        v = smoothstep(u)
        assert 0.0 <= v <= 1.0
        assert smoothstep(u + 0.01) >= v - 1e-12


class TestPromptProperties:
    @given(st.text(min_size=1, max_size=120).filter(lambda s: s.strip()),
           st.sampled_from(list(StyleTag)))
    @settings(max_examples=100, deadline=None)
    def test_description_always_verbatim_substring(self, description, style):
        bundle = compose_prompt(PromptFields(
            style=style,
            background_description=description,
            mood_tone="wistful",
            genre="drama",
        ))
        assert description.strip() in bundle.background_prompt


class TestScenePurity:
    @given(st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=8, unique=True))
    @settings(max_examples=50, deadline=None)
    def test_add_entity_never_mutates_input(self, names):
        from previz.scene import Camera, Light, Scene, SceneEntity, add_entity

        scene = Scene(id="s", cameras=(Camera(id="cam"),), lights=(Light(id="amb"),))
        snapshots = [scene]
        for name in names:
            scene, _ = add_entity(scene, SceneEntity(id=name))
            snapshots.append(scene)
        # every intermediate value is still exactly what it was
        for i, snap in enumerate(snapshots):
            assert len(snap.entities) == i
            assert [e.id for e in snap.entities] == names[:i]
