"""Turn timed WASD + Q/E input events into motion paths.

Keys map to fixed scene axes at record time: W/S along -Z/+Z, A/D along
-X/+X, Q/E along -Y/+Y. Facing (yaw) is derived from the velocity
direction with exponential smoothing, so it never feeds back into the
integrated positions — a recorded square comes back to its start.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Vec3, wrap_angle
from .timeline import MotionPath, TimelineError

INTEGRATION_HZ = 30
OUTPUT_MAX_HZ = 10
SIMPLIFY_TOLERANCE_M = 0.01
YAW_SMOOTHING_S = 0.2

_KEY_DIRS = {
    "w": Vec3(0.0, 0.0, -1.0),
    "s": Vec3(0.0, 0.0, 1.0),
    "a": Vec3(-1.0, 0.0, 0.0),
    "d": Vec3(1.0, 0.0, 0.0),
    "q": Vec3(0.0, -1.0, 0.0),
    "e": Vec3(0.0, 1.0, 0.0),
}


class EmptyRecording(TimelineError):
    pass


@dataclass(frozen=True)
class InputEvent:
    t: float
    key: str
    pressed: bool

    def __post_init__(self):
        if self.key.lower() not in _KEY_DIRS:
            raise TimelineError(f"unsupported key {self.key!r} (use WASD/QE)")


def _velocity(down: set[str], speed: float) -> Vec3:
    v = Vec3()
    for k in down:
        v = v + _KEY_DIRS[k]
    n = v.norm()
    if n == 0.0:
        return Vec3()
    return v * (speed / n)


def _integrate(events: list[InputEvent], speed: float) -> list[tuple[float, Vec3, float]]:
    """Dense samples at INTEGRATION_HZ; positions are exact (velocity is
    piecewise constant, so each step integrates across event boundaries)."""
    t0, t1 = events[0].t, events[-1].t
    steps = max(1, math.ceil(round((t1 - t0) * INTEGRATION_HZ, 9)))
    dt = 1.0 / INTEGRATION_HZ

    down: set[str] = set()
    ev_i = 0
    pos = Vec3()
    yaw = 0.0
    yaw_init = False
    samples = [(0.0, pos, yaw)]
    for k in range(steps):
        seg_a = t0 + k * dt
        seg_b = min(t0 + (k + 1) * dt, t1)
        t = seg_a
        while t < seg_b - 1e-12:
            while ev_i < len(events) and events[ev_i].t <= t + 1e-12:
                e = events[ev_i]
                (down.add if e.pressed else down.discard)(e.key.lower())
                ev_i += 1
            t_next = seg_b
            if ev_i < len(events) and events[ev_i].t < t_next:
                t_next = events[ev_i].t
            v = _velocity(down, speed)
            pos = pos + v * (t_next - t)
            t = t_next
        v = _velocity(down, speed)
        if v.norm() > 0.0:
            target = math.atan2(-v.x, -v.z)
            if not yaw_init:
                yaw = target
                yaw_init = True
            else:
                alpha = 1.0 - math.exp(-dt / YAW_SMOOTHING_S)
                yaw = wrap_angle(yaw + alpha * wrap_angle(target - yaw))
        samples.append((seg_b - t0, pos, yaw))
    return samples


def _douglas_peucker(samples, tol: float) -> list[int]:
    keep = {0, len(samples) - 1}
    stack = [(0, len(samples) - 1)]
    while stack:
        a, b = stack.pop()
        if b - a < 2:
            continue
        pa, pb = samples[a][1], samples[b][1]
        chord = pb - pa
        clen2 = chord.dot(chord)
        worst, worst_d = -1, tol
        for i in range(a + 1, b):
            p = samples[i][1] - pa
            if clen2 == 0.0:
                d = p.norm()
            else:
                u = max(0.0, min(1.0, p.dot(chord) / clen2))
                d = (p - chord * u).norm()
            if d > worst_d:
                worst, worst_d = i, d
        if worst >= 0:
            keep.add(worst)
            stack.append((a, worst))
            stack.append((worst, b))
    return sorted(keep)


def _deviation_ok(samples, a: int, b: int, tol: float) -> bool:
    pa, pb = samples[a][1], samples[b][1]
    ta, tb = samples[a][0], samples[b][0]
    for i in range(a + 1, b):
        u = (samples[i][0] - ta) / (tb - ta)
        interp = pa + (pb - pa) * u
        if (samples[i][1] - interp).norm() > tol:
            return False
    return True


def record_motion_path(
    events: list[InputEvent],
    speed: float,
    entity_id: str = "",
    start: Vec3 = Vec3(),
) -> MotionPath:
    """Integrate events at 30 Hz, then thin to <= 10 samples/s where the
    thinned polyline stays within 1 cm of the dense integration."""
    if not events:
        raise EmptyRecording("no input events recorded")
    if speed <= 0.0:
        raise TimelineError(f"speed must be > 0, got {speed}")
    times = [e.t for e in events]
    if any(b < a for a, b in zip(times, times[1:])):
        raise TimelineError("events must be time-ordered")
    if events[-1].t <= events[0].t:
        raise EmptyRecording("recording has zero duration")

    dense = _integrate(events, speed)
    keep = _douglas_peucker(dense, SIMPLIFY_TOLERANCE_M)

    # Thin below the output rate cap wherever it does not break the 1 cm bound.
    min_dt = 1.0 / OUTPUT_MAX_HZ
    thinned = [keep[0]]
    for j in range(1, len(keep) - 1):
        idx = keep[j]
        if dense[idx][0] - dense[thinned[-1]][0] >= min_dt - 1e-9:
            thinned.append(idx)
        elif not _deviation_ok(dense, thinned[-1], keep[j + 1], SIMPLIFY_TOLERANCE_M):
            thinned.append(idx)
    thinned.append(keep[-1])

    out = [(dense[i][0], start + dense[i][1], dense[i][2]) for i in thinned]
    return MotionPath(entity_id=entity_id, samples=tuple(out), source="recorded")


def integrate_dense(events: list[InputEvent], speed: float, start: Vec3 = Vec3()):
    """Dense 30 Hz integration without simplification (diagnostics/tests)."""
    if not events:
        raise EmptyRecording("no input events recorded")
    return [(t, start + p, yaw) for t, p, yaw in _integrate(events, speed)]
