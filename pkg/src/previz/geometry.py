"""Vector, quaternion, and transform math shared by every module.

Conventions: right-handed coordinate system, +Y up, cameras and
directional lights look down their local -Z axis. Angles are radians
unless a name says otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

_QUAT_NORM_TOL = 1e-6


@dataclass(frozen=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite Vec3 components: {self}")

    def __add__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x + o.x, self.y + o.y, self.z + o.z)

    def __sub__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x - o.x, self.y - o.y, self.z - o.z)

    def __mul__(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def scaled(self, s: "Vec3") -> "Vec3":
        """Component-wise product."""
        return Vec3(self.x * s.x, self.y * s.y, self.z * s.z)

    def dot(self, o: "Vec3") -> float:
        return self.x * o.x + self.y * o.y + self.z * o.z

    def cross(self, o: "Vec3") -> "Vec3":
        return Vec3(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


X_AXIS = Vec3(1.0, 0.0, 0.0)
Y_AXIS = Vec3(0.0, 1.0, 0.0)
Z_AXIS = Vec3(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class RotationQ:
    """Unit quaternion (w, x, y, z)."""

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > _QUAT_NORM_TOL:
            raise ValueError(f"quaternion norm {n} outside unit tolerance")

    @staticmethod
    def identity() -> "RotationQ":
        return RotationQ(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis: Vec3, angle: float) -> "RotationQ":
        u = axis.normalized()
        h = 0.5 * angle
        s = math.sin(h)
        return RotationQ(math.cos(h), u.x * s, u.y * s, u.z * s)

    @staticmethod
    def yaw(angle: float) -> "RotationQ":
        """Rotation about +Y; yaw 0 faces -Z."""
        return RotationQ.from_axis_angle(Y_AXIS, angle)

    def normalized(self) -> "RotationQ":
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        return RotationQ(self.w / n, self.x / n, self.y / n, self.z / n)

    def conjugate(self) -> "RotationQ":
        return RotationQ(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, o: "RotationQ") -> "RotationQ":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = o.w, o.x, o.y, o.z
        return _unit_q(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v: Vec3) -> Vec3:
        # q v q* expanded; no trig, exact in the components.
        w, x, y, z = self.w, self.x, self.y, self.z
        tx = 2.0 * (y * v.z - z * v.y)
        ty = 2.0 * (z * v.x - x * v.z)
        tz = 2.0 * (x * v.y - y * v.x)
        return Vec3(
            v.x + w * tx + (y * tz - z * ty),
            v.y + w * ty + (z * tx - x * tz),
            v.z + w * tz + (x * ty - y * tx),
        )

    def dot(self, o: "RotationQ") -> float:
        return self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z

    def angle_to(self, o: "RotationQ") -> float:
        """Geodesic rotation angle between the two rotations."""
        d = min(1.0, abs(self.dot(o)))
        return 2.0 * math.acos(d)

    def axis_angle(self) -> tuple[Vec3, float]:
        """Axis and angle in [0, pi]; identity returns (+Y, 0)."""
        q = self if self.w >= 0.0 else RotationQ(-self.w, -self.x, -self.y, -self.z)
        s = math.sqrt(max(0.0, 1.0 - q.w * q.w))
        if s < 1e-12:
            return Y_AXIS, 0.0
        return Vec3(q.x / s, q.y / s, q.z / s), 2.0 * math.acos(min(1.0, q.w))


def _unit_q(w: float, x: float, y: float, z: float) -> RotationQ:
    n = math.sqrt(w * w + x * x + y * y + z * z)
    return RotationQ(w / n, x / n, y / n, z / n)


def slerp(a: RotationQ, b: RotationQ, t: float) -> RotationQ:
    """Shortest-arc spherical interpolation.

    Exact 180-degree ties are resolved by orienting the relative rotation
    axis into the +Y hemisphere (then +X, then +Z), so interpolation takes
    the arc through the +Y great circle.
    """
    d = a.dot(b)
    bw, bx, by, bz = b.w, b.x, b.y, b.z
    if d < 0.0:
        d, bw, bx, by, bz = -d, -bw, -bx, -by, -bz
    if d < 1e-12:
        # 180-degree tie: interpolate through an explicitly chosen axis.
        rel = a.conjugate() * RotationQ(bw, bx, by, bz).normalized()
        axis, angle = rel.axis_angle()
        for comp in (axis.y, axis.x, axis.z):
            if comp > 0.0:
                break
            if comp < 0.0:
                axis = -axis
                break
        return a * RotationQ.from_axis_angle(axis, angle * t)
    if d > 0.9995:
        # Nearly parallel: nlerp is numerically safer and within tolerance.
        return _unit_q(
            a.w + t * (bw - a.w),
            a.x + t * (bx - a.x),
            a.y + t * (by - a.y),
            a.z + t * (bz - a.z),
        )
    omega = math.acos(min(1.0, d))
    so = math.sin(omega)
    ka = math.sin((1.0 - t) * omega) / so
    kb = math.sin(t * omega) / so
    return _unit_q(
        ka * a.w + kb * bw,
        ka * a.x + kb * bx,
        ka * a.y + kb * by,
        ka * a.z + kb * bz,
    )


@dataclass(frozen=True)
class Transform:
    translation: Vec3 = Vec3()
    rotation: RotationQ = RotationQ.identity()
    scale: Vec3 = Vec3(1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.scale.x <= 0.0 or self.scale.y <= 0.0 or self.scale.z <= 0.0:
            raise ValueError(f"scale components must be > 0, got {self.scale}")

    @staticmethod
    def identity() -> "Transform":
        return Transform()

    @staticmethod
    def at(x: float, y: float, z: float) -> "Transform":
        return Transform(translation=Vec3(x, y, z))

    def apply(self, p: Vec3) -> Vec3:
        """Map a point from local space to parent space (scale, rotate, translate)."""
        return self.translation + self.rotation.rotate(p.scaled(self.scale))

    def apply_inverse(self, p: Vec3) -> Vec3:
        q = self.rotation.conjugate().rotate(p - self.translation)
        return Vec3(q.x / self.scale.x, q.y / self.scale.y, q.z / self.scale.z)

    def compose(self, inner: "Transform") -> "Transform":
        """self after inner: (a.compose(b)).apply(p) == a.apply(b.apply(p)).

        Exact for uniform self.scale; per-axis scale under an inner rotation
        would introduce shear, which this representation cannot hold.
        """
        return Transform(
            translation=self.apply(inner.translation),
            rotation=self.rotation * inner.rotation,
            scale=self.scale.scaled(inner.scale),
        )


def smoothstep(u: float) -> float:
    u = min(1.0, max(0.0, u))
    return u * u * (3.0 - 2.0 * u)


def lerp(a: float, b: float, t: float) -> float:
    return a + (b - a) * t


def wrap_angle(a: float) -> float:
    """Wrap into (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a
