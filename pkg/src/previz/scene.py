"""Value-typed 3D scene model: entities, lights, cameras, and projection.

Scenes are immutable; every operation returns a new Scene. Entity, camera,
and light ids live in disjoint namespaces within one scene.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .geometry import Transform, Vec3

RGB = tuple[float, float, float]

# Horizontal field of view for common cinema lenses on a 36 mm-wide sensor,
# rounded to one decimal: fov = 2*atan(18/focal_length).
CAMERA_PRESETS: dict[str, float] = {
    "wide-24mm": 73.7,
    "normal-50mm": 39.6,
    "tele-85mm": 23.9,
}

ENTITY_ROLES = ("prop", "character", "set-piece")
LIGHT_KINDS = ("ambient", "directional", "point")


class SceneError(Exception):
    pass


class DuplicateId(SceneError):
    pass


class UnknownId(SceneError):
    pass


class InvalidGeometry(SceneError):
    pass


class ColorOutOfRange(SceneError):
    pass


def _check_rgb(color: RGB, what: str = "color") -> None:
    if len(color) != 3 or any((not math.isfinite(c)) or c < 0.0 or c > 1.0 for c in color):
        raise ColorOutOfRange(f"{what} {color} outside [0,1]^3")


@dataclass(frozen=True)
class ProxyGeometry:
    """Triangle-soup proxy shape.

    kind 'box' is a unit cube centered at the origin, 'plane' a unit quad in
    the local XZ plane, 'mesh' carries imported triangles. Vertices are
    local-space positions; triangles index into them.
    """

    kind: str = "box"
    vertices: tuple[tuple[float, float, float], ...] = ()
    triangles: tuple[tuple[int, int, int], ...] = ()
    vertex_colors: Optional[tuple[RGB, ...]] = None

    @staticmethod
    def box() -> "ProxyGeometry":
        return ProxyGeometry(kind="box")

    @staticmethod
    def plane() -> "ProxyGeometry":
        return ProxyGeometry(kind="plane")

    @staticmethod
    def mesh(vertices, triangles, vertex_colors=None) -> "ProxyGeometry":
        verts = tuple((float(x), float(y), float(z)) for x, y, z in vertices)
        tris = tuple((int(a), int(b), int(c)) for a, b, c in triangles)
        if not tris:
            raise InvalidGeometry("imported mesh has no triangles")
        for v in verts:
            if any(not math.isfinite(c) for c in v):
                raise InvalidGeometry(f"non-finite vertex {v}")
        n = len(verts)
        for t in tris:
            if any(i < 0 or i >= n for i in t):
                raise InvalidGeometry(f"triangle index out of range: {t}")
        colors = None
        if vertex_colors is not None:
            colors = tuple((float(r), float(g), float(b)) for r, g, b in vertex_colors)
            if len(colors) != n:
                raise InvalidGeometry("vertex color count does not match vertex count")
        return ProxyGeometry(kind="mesh", vertices=verts, triangles=tris, vertex_colors=colors)

    def local_triangles(self) -> list[tuple[Vec3, Vec3, Vec3]]:
        """Expand to local-space triangle list."""
        if self.kind == "box":
            return _BOX_TRIS
        if self.kind == "plane":
            return _PLANE_TRIS
        vs = [Vec3(*v) for v in self.vertices]
        return [(vs[a], vs[b], vs[c]) for a, b, c in self.triangles]


def _quad(a: Vec3, b: Vec3, c: Vec3, d: Vec3):
    return [(a, b, c), (a, c, d)]


def _box_tris() -> list[tuple[Vec3, Vec3, Vec3]]:
    h = 0.5
    p = {}
    for sx in (-h, h):
        for sy in (-h, h):
            for sz in (-h, h):
                p[(sx > 0, sy > 0, sz > 0)] = Vec3(sx, sy, sz)
    tris = []
    # Outward-wound faces (CCW seen from outside).
    tris += _quad(p[(0, 0, 1)], p[(1, 0, 1)], p[(1, 1, 1)], p[(0, 1, 1)])  # +Z
    tris += _quad(p[(1, 0, 0)], p[(0, 0, 0)], p[(0, 1, 0)], p[(1, 1, 0)])  # -Z
    tris += _quad(p[(1, 0, 1)], p[(1, 0, 0)], p[(1, 1, 0)], p[(1, 1, 1)])  # +X
    tris += _quad(p[(0, 0, 0)], p[(0, 0, 1)], p[(0, 1, 1)], p[(0, 1, 0)])  # -X
    tris += _quad(p[(0, 1, 1)], p[(1, 1, 1)], p[(1, 1, 0)], p[(0, 1, 0)])  # +Y
    tris += _quad(p[(0, 0, 0)], p[(1, 0, 0)], p[(1, 0, 1)], p[(0, 0, 1)])  # -Y
    return tris


_BOX_TRIS = _box_tris()
_PLANE_TRIS = _quad(Vec3(-0.5, 0, -0.5), Vec3(-0.5, 0, 0.5), Vec3(0.5, 0, 0.5), Vec3(0.5, 0, -0.5))


@dataclass(frozen=True)
class CanonicalRig:
    """Named joint offsets in entity space, keyed by the 18-joint body schema."""

    joints: tuple[tuple[str, Vec3], ...]

    def joint_map(self) -> dict[str, Vec3]:
        return dict(self.joints)


@dataclass(frozen=True)
class Camera:
    id: str
    transform: Transform = field(default_factory=Transform.identity)
    fov_deg: float = CAMERA_PRESETS["normal-50mm"]
    near: float = 0.1
    far: float = 200.0
    label: str = "normal-50mm"

    def __post_init__(self):
        if not (1.0 < self.fov_deg < 179.0):
            raise SceneError(f"fov {self.fov_deg} outside (1, 179)")
        if not (0.0 < self.near < self.far):
            raise SceneError(f"invalid near/far: {self.near}/{self.far}")

    @staticmethod
    def preset(camera_id: str, label: str, transform: Transform = None, near: float = 0.1, far: float = 200.0) -> "Camera":
        if label not in CAMERA_PRESETS:
            raise SceneError(f"unknown camera preset {label!r}; presets: {sorted(CAMERA_PRESETS)}")
        return Camera(
            id=camera_id,
            transform=transform if transform is not None else Transform.identity(),
            fov_deg=CAMERA_PRESETS[label],
            near=near,
            far=far,
            label=label,
        )


@dataclass(frozen=True)
class Light:
    id: str
    kind: str = "ambient"
    color: RGB = (1.0, 1.0, 1.0)
    intensity: float = 1.0
    transform: Transform = field(default_factory=Transform.identity)  # ignored for ambient

    def __post_init__(self):
        if self.kind not in LIGHT_KINDS:
            raise SceneError(f"unknown light kind {self.kind!r}")
        _check_rgb(self.color, "light color")
        if not math.isfinite(self.intensity) or self.intensity < 0.0:
            raise SceneError(f"light intensity must be finite and >= 0, got {self.intensity}")


@dataclass(frozen=True)
class SceneEntity:
    id: str
    name: str = ""
    role: str = "prop"
    geometry: ProxyGeometry = field(default_factory=ProxyGeometry.box)
    transform: Transform = field(default_factory=Transform.identity)
    base_color: RGB = (0.7, 0.7, 0.7)
    movable: bool = False
    character_profile_ref: Optional[str] = None
    rig: Optional[CanonicalRig] = None

    def __post_init__(self):
        if self.role not in ENTITY_ROLES:
            raise SceneError(f"unknown entity role {self.role!r}")
        _check_rgb(self.base_color, "base_color")
        if self.rig is not None and self.role != "character":
            raise SceneError(f"entity {self.id!r}: only characters may carry a rig")
        if self.geometry.kind == "mesh" and not self.geometry.triangles:
            raise InvalidGeometry(f"entity {self.id!r}: mesh with no triangles")


@dataclass(frozen=True)
class Scene:
    id: str
    entities: tuple[SceneEntity, ...] = ()
    cameras: tuple[Camera, ...] = ()
    lights: tuple[Light, ...] = ()
    backdrop_color: RGB = (0.12, 0.12, 0.14)

    def __post_init__(self):
        _check_rgb(self.backdrop_color, "backdrop_color")
        ids = [e.id for e in self.entities] + [c.id for c in self.cameras] + [l.id for l in self.lights]
        seen = set()
        for i in ids:
            if i in seen:
                raise DuplicateId(f"id {i!r} reused across scene namespaces")
            seen.add(i)

    def entity(self, entity_id: str) -> SceneEntity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise UnknownId(f"no entity {entity_id!r} in scene {self.id!r}")

    def camera(self, camera_id: str) -> Camera:
        for c in self.cameras:
            if c.id == camera_id:
                return c
        raise UnknownId(f"no camera {camera_id!r} in scene {self.id!r}")

    def light(self, light_id: str) -> Light:
        for l in self.lights:
            if l.id == light_id:
                return l
        raise UnknownId(f"no light {light_id!r} in scene {self.id!r}")

    def has_id(self, any_id: str) -> bool:
        return any(e.id == any_id for e in self.entities) or \
            any(c.id == any_id for c in self.cameras) or \
            any(l.id == any_id for l in self.lights)

    def raster_codes(self) -> dict[str, int]:
        """Entity id -> 16-bit raster code (1-based insertion order; 0 is background)."""
        return {e.id: i + 1 for i, e in enumerate(self.entities)}

    def entity_for_code(self, code: int) -> Optional[SceneEntity]:
        if 1 <= code <= len(self.entities):
            return self.entities[code - 1]
        return None


def add_entity(scene: Scene, spec: SceneEntity) -> tuple[Scene, str]:
    """Append an entity; prior entities keep their order and raster codes."""
    if scene.has_id(spec.id):
        raise DuplicateId(f"id {spec.id!r} already present in scene {scene.id!r}")
    if len(scene.entities) + 1 > 0xFFFF:
        raise SceneError("entity raster-code space (16-bit) exhausted")
    return replace(scene, entities=scene.entities + (spec,)), spec.id


def add_camera(scene: Scene, camera: Camera) -> Scene:
    if scene.has_id(camera.id):
        raise DuplicateId(f"id {camera.id!r} already present in scene {scene.id!r}")
    return replace(scene, cameras=scene.cameras + (camera,))


def add_light(scene: Scene, light: Light) -> Scene:
    if scene.has_id(light.id):
        raise DuplicateId(f"id {light.id!r} already present in scene {scene.id!r}")
    return replace(scene, lights=scene.lights + (light,))


def set_appearance(
    scene: Scene,
    target_id: str,
    color: Optional[RGB] = None,
    intensity: Optional[float] = None,
) -> Scene:
    """Update one entity's base color, or one light's color/intensity.

    Only the targeted object changes; everything else is reused as-is.
    """
    if color is not None:
        _check_rgb(color)
    for i, e in enumerate(scene.entities):
        if e.id == target_id:
            if intensity is not None:
                raise SceneError(f"entity {target_id!r} has no intensity")
            if color is None:
                return scene
            ents = scene.entities[:i] + (replace(e, base_color=tuple(color)),) + scene.entities[i + 1:]
            return replace(scene, entities=ents)
    for i, l in enumerate(scene.lights):
        if l.id == target_id:
            updated = l
            if color is not None:
                updated = replace(updated, color=tuple(color))
            if intensity is not None:
                if not math.isfinite(intensity) or intensity < 0.0:
                    raise SceneError(f"intensity must be finite and >= 0, got {intensity}")
                updated = replace(updated, intensity=intensity)
            lights = scene.lights[:i] + (updated,) + scene.lights[i + 1:]
            return replace(scene, lights=lights)
    raise UnknownId(f"no entity or light {target_id!r} in scene {scene.id!r}")


def set_entity_transform(scene: Scene, entity_id: str, transform: Transform) -> Scene:
    for i, e in enumerate(scene.entities):
        if e.id == entity_id:
            ents = scene.entities[:i] + (replace(e, transform=transform),) + scene.entities[i + 1:]
            return replace(scene, entities=ents)
    raise UnknownId(f"no entity {entity_id!r} in scene {scene.id!r}")


# ---------------------------------------------------------------------------
# Projection

# ndc slack so points computed to lie exactly on the frustum boundary survive
# float rounding.
_CLIP_MARGIN = 1e-9


def fov_tangents(fov_deg: float, width: float, height: float) -> tuple[float, float]:
    """(tan(fov_x/2), tan(fov_y/2)); fov_deg is the horizontal field of view."""
    tx = math.tan(math.radians(fov_deg) * 0.5)
    return tx, tx * (height / width)


def project_point(
    camera: Camera,
    p: Vec3,
    viewport: tuple[int, int],
    camera_transform: Optional[Transform] = None,
    fov_deg: Optional[float] = None,
) -> Optional[tuple[float, float, float]]:
    """Pinhole-project a world point; returns (px, py, eye_depth) or None.

    Pixel coordinates are continuous with (0,0) at the top-left corner, so
    the image center is (w/2, h/2). Eye depth is the distance along the view
    axis in meters. Points nearer than the near plane or outside the frustum
    (with a tiny clip margin) return None.
    """
    w, h = viewport
    if w < 1 or h < 1:
        raise SceneError(f"viewport must be >= 1x1, got {w}x{h}")
    xf = camera_transform if camera_transform is not None else camera.transform
    q = xf.apply_inverse(p)
    depth = -q.z
    if depth < camera.near:
        return None
    tx, ty = fov_tangents(fov_deg if fov_deg is not None else camera.fov_deg, w, h)
    ndc_x = q.x / (depth * tx)
    ndc_y = q.y / (depth * ty)
    if abs(ndc_x) > 1.0 + _CLIP_MARGIN or abs(ndc_y) > 1.0 + _CLIP_MARGIN:
        return None
    px = (ndc_x + 1.0) * 0.5 * w
    py = (1.0 - ndc_y) * 0.5 * h
    return px, py, depth


def unproject_pixel(
    camera: Camera,
    pixel: tuple[float, float],
    depth: float,
    viewport: tuple[int, int],
    camera_transform: Optional[Transform] = None,
    fov_deg: Optional[float] = None,
) -> Vec3:
    """Inverse of project_point for an on-screen pixel at a given eye depth."""
    w, h = viewport
    tx, ty = fov_tangents(fov_deg if fov_deg is not None else camera.fov_deg, w, h)
    ndc_x = 2.0 * pixel[0] / w - 1.0
    ndc_y = 1.0 - 2.0 * pixel[1] / h
    q = Vec3(ndc_x * depth * tx, ndc_y * depth * ty, -depth)
    xf = camera_transform if camera_transform is not None else camera.transform
    return xf.apply(q)
