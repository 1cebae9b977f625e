"""Deterministic software rasterizer producing conditioning channels.

Renders a scene to color / inverse-depth / entity-id buffers with a
z-buffer over triangles. Coverage is decided by integer edge functions on
vertices snapped to a 1/256-pixel grid (24.8 fixed point) with a top-left
fill rule, so identical inputs give byte-identical buffers everywhere.
Shading is flat Lambert + ambient: previz frames are meant to look rough.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Transform, Vec3
from .scene import RGB, Camera, Scene, SceneError, fov_tangents

SUBPIXEL = 256  # fixed-point grid: 1/256 px
MIN_SIZE, MAX_SIZE = 16, 4096
_GUARD_BAND = 1.1  # side-plane clip margin relative to the frustum


class RasterError(SceneError):
    pass


class DegenerateCamera(RasterError):
    pass


class SceneNotRenderable(RasterError):
    pass


@dataclass(frozen=True)
class ConditioningFrame:
    """Per-frame raster channels consumed by the generation backend.

    depth is 8-bit inverse depth (255 = at the near plane, 0 = at/beyond
    far). id holds 16-bit entity codes (0 = background); id_codes maps
    codes back to scene entity ids. Buffers are read-only.
    """

    width: int
    height: int
    color: np.ndarray  # (h, w, 3) uint8
    depth: np.ndarray  # (h, w) uint8
    id: np.ndarray     # (h, w) uint16
    id_codes: tuple[tuple[int, str], ...]
    pose: Optional[np.ndarray] = None  # (h, w, 3) uint8

    def __post_init__(self):
        for buf in (self.color, self.depth, self.id) + ((self.pose,) if self.pose is not None else ()):
            if buf.shape[:2] != (self.height, self.width):
                raise RasterError("channel dimensions disagree")
            buf.flags.writeable = False

    def code_for(self, entity_id: str) -> int:
        for code, eid in self.id_codes:
            if eid == entity_id:
                return code
        raise RasterError(f"entity {entity_id!r} has no raster code in this frame")


@dataclass(frozen=True)
class ScreenTriangle:
    """A near/side-clipped triangle in snapped screen space.

    xy are fixed-point pixel coordinates (1/256 px), inv_z the per-vertex
    reciprocal eye depth, code the 16-bit entity code, rgb the flat-shaded
    face color.
    """

    xy: tuple[tuple[int, int], tuple[int, int], tuple[int, int]]
    inv_z: tuple[float, float, float]
    code: int
    rgb: tuple[int, int, int]


def _light_contribution(lights, light_states, normal: Vec3, centroid: Vec3) -> Vec3:
    acc = Vec3()
    for light in lights:
        color, intensity = light_states.get(light.id, (light.color, light.intensity))
        if intensity == 0.0:
            continue
        if light.kind == "ambient":
            lam = 1.0
        elif light.kind == "directional":
            emit = light.transform.rotation.rotate(Vec3(0.0, 0.0, -1.0))
            lam = max(0.0, normal.dot(-emit))
        else:
            to_light = light.transform.translation - centroid
            n = to_light.norm()
            if n == 0.0:
                continue
            lam = max(0.0, normal.dot(to_light * (1.0 / n)))
        acc = acc + Vec3(color[0], color[1], color[2]) * (lam * intensity)
    return acc


def _shade(base: RGB, light_acc: Vec3) -> tuple[int, int, int]:
    out = []
    for b, l in zip(base, (light_acc.x, light_acc.y, light_acc.z)):
        v = min(1.0, max(0.0, b * l))
        out.append(int(math.floor(v * 255.0 + 0.5)))
    return tuple(out)


def _clip_poly(poly, plane):
    """Sutherland-Hodgman against one half-space f(p) >= 0; attributes lerped."""
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        fa, fb = plane(a[0]), plane(b[0])
        if fa >= 0.0:
            out.append(a)
        if (fa >= 0.0) != (fb >= 0.0):
            t = fa / (fa - fb)
            p = a[0] + (b[0] - a[0]) * t
            out.append((p,))
    return out


def _snap(v: float) -> int:
    return int(math.floor(v * SUBPIXEL + 0.5))


def screen_triangles(
    scene: Scene,
    camera: Camera,
    size: tuple[int, int],
    camera_transform: Optional[Transform] = None,
    fov_deg: Optional[float] = None,
    entity_transforms: Optional[dict[str, Transform]] = None,
    entity_colors: Optional[dict[str, RGB]] = None,
    light_states: Optional[dict] = None,
) -> list[ScreenTriangle]:
    """Project, clip, shade, and snap every scene triangle.

    This is the shared front half of the render: both the scanline
    rasterizer and the per-pixel reference caster consume its output, so
    they answer for exactly the same screen-space geometry.
    """
    w, h = size
    if not (MIN_SIZE <= w <= MAX_SIZE and MIN_SIZE <= h <= MAX_SIZE):
        raise RasterError(f"size {w}x{h} outside [{MIN_SIZE}, {MAX_SIZE}]^2")
    if camera.near >= camera.far:
        raise DegenerateCamera(f"near {camera.near} >= far {camera.far}")
    if not scene.lights:
        raise SceneNotRenderable(f"scene {scene.id!r} has no lights")

    cam_xf = camera_transform if camera_transform is not None else camera.transform
    tx, ty = fov_tangents(fov_deg if fov_deg is not None else camera.fov_deg, w, h)
    near = camera.near
    entity_transforms = entity_transforms or {}
    entity_colors = entity_colors or {}
    light_states = light_states or {}
    cam_pos = cam_xf.translation

    planes = [
        lambda p: -p.z - near,
        lambda p: _GUARD_BAND * tx * (-p.z) - p.x,
        lambda p: _GUARD_BAND * tx * (-p.z) + p.x,
        lambda p: _GUARD_BAND * ty * (-p.z) - p.y,
        lambda p: _GUARD_BAND * ty * (-p.z) + p.y,
    ]

    out: list[ScreenTriangle] = []
    codes = scene.raster_codes()
    for entity in scene.entities:
        code = codes[entity.id]
        xf = entity_transforms.get(entity.id, entity.transform)
        base = entity_colors.get(entity.id, entity.base_color)
        for tri in entity.geometry.local_triangles():
            wa, wb, wc = (xf.apply(v) for v in tri)
            e1, e2 = wb - wa, wc - wa
            n = e1.cross(e2)
            nl = n.norm()
            if nl == 0.0:
                continue
            n = n * (1.0 / nl)
            centroid = (wa + wb + wc) * (1.0 / 3.0)
            if n.dot(centroid - cam_pos) > 0.0:
                n = -n
            rgb = _shade(base, _light_contribution(scene.lights, light_states, n, centroid))

            poly = [(cam_xf.apply_inverse(p),) for p in (wa, wb, wc)]
            for plane in planes:
                poly = _clip_poly(poly, plane)
                if len(poly) < 3:
                    break
            if len(poly) < 3:
                continue

            snapped = []
            for (p,) in poly:
                d = -p.z
                px = (p.x / (d * tx) + 1.0) * 0.5 * w
                py = (1.0 - p.y / (d * ty)) * 0.5 * h
                snapped.append((_snap(px), _snap(py), 1.0 / d))
            for i in range(1, len(snapped) - 1):
                a, b, c = snapped[0], snapped[i], snapped[i + 1]
                out.append(ScreenTriangle(
                    xy=((a[0], a[1]), (b[0], b[1]), (c[0], c[1])),
                    inv_z=(a[2], b[2], c[2]),
                    code=code,
                    rgb=rgb,
                ))
    return out


def _is_top_left(ax: int, ay: int, bx: int, by: int) -> bool:
    # y grows downward: top = horizontal going left, left = going down.
    return (ay == by and bx < ax) or (by > ay)


def rasterize(tris: list[ScreenTriangle], size: tuple[int, int], backdrop: RGB):
    """Scanline-style fill with incremental integer edge functions + z-buffer."""
    w, h = size
    color = np.empty((h, w, 3), dtype=np.uint8)
    color[:, :] = [int(math.floor(c * 255.0 + 0.5)) for c in backdrop]
    inv_z = np.zeros((h, w), dtype=np.float64)
    ids = np.zeros((h, w), dtype=np.uint16)

    for tri in tris:
        (x0, y0), (x1, y1), (x2, y2) = tri.xy
        area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area == 0:
            continue
        iz0, iz1, iz2 = tri.inv_z
        if area < 0:
            x1, y1, x2, y2 = x2, y2, x1, y1
            iz1, iz2 = iz2, iz1
            area = -area

        # pixel centers sit at i*SUBPIXEL + SUBPIXEL//2 in fixed point
        half = SUBPIXEL // 2
        min_x = max(0, (min(x0, x1, x2) - half + SUBPIXEL - 1) // SUBPIXEL)
        max_x = min(w - 1, (max(x0, x1, x2) - half) // SUBPIXEL)
        min_y = max(0, (min(y0, y1, y2) - half + SUBPIXEL - 1) // SUBPIXEL)
        max_y = min(h - 1, (max(y0, y1, y2) - half) // SUBPIXEL)
        if min_x > max_x or min_y > max_y:
            continue

        pxs = (np.arange(min_x, max_x + 1, dtype=np.int64) * SUBPIXEL + half)[None, :]
        pys = (np.arange(min_y, max_y + 1, dtype=np.int64) * SUBPIXEL + half)[:, None]

        w0 = (x2 - x1) * (pys - y1) - (y2 - y1) * (pxs - x1)
        w1 = (x0 - x2) * (pys - y2) - (y0 - y2) * (pxs - x2)
        w2 = (x1 - x0) * (pys - y0) - (y1 - y0) * (pxs - x0)

        b0 = 0 if _is_top_left(x1, y1, x2, y2) else -1
        b1 = 0 if _is_top_left(x2, y2, x0, y0) else -1
        b2 = 0 if _is_top_left(x0, y0, x1, y1) else -1
        inside = ((w0 + b0) >= 0) & ((w1 + b1) >= 0) & ((w2 + b2) >= 0)
        if not inside.any():
            continue

        zi = (w0 * iz0 + w1 * iz1 + w2 * iz2) / float(area)
        region = (slice(min_y, max_y + 1), slice(min_x, max_x + 1))
        wins = inside & (zi > inv_z[region])
        if not wins.any():
            continue
        inv_z[region][wins] = zi[wins]
        ids[region][wins] = tri.code
        color[region][wins] = tri.rgb
    return color, inv_z, ids


def encode_depth(inv_z: np.ndarray, covered: np.ndarray, near: float, far: float) -> np.ndarray:
    """255 at the near plane down to 0 at/beyond far; background stays 0."""
    scale = 1.0 / near - 1.0 / far
    val = (inv_z - 1.0 / far) / scale
    out = np.clip(np.floor(val * 255.0 + 0.5), 0.0, 255.0).astype(np.uint8)
    out[~covered] = 0
    return out


def render_frame(
    scene: Scene,
    camera: Camera,
    size: tuple[int, int],
    camera_transform: Optional[Transform] = None,
    fov_deg: Optional[float] = None,
    entity_transforms: Optional[dict[str, Transform]] = None,
    entity_colors: Optional[dict[str, RGB]] = None,
    light_states: Optional[dict] = None,
    pose: Optional[np.ndarray] = None,
) -> ConditioningFrame:
    """Render one conditioning frame (color, inverse depth, entity ids)."""
    tris = screen_triangles(
        scene, camera, size,
        camera_transform=camera_transform,
        fov_deg=fov_deg,
        entity_transforms=entity_transforms,
        entity_colors=entity_colors,
        light_states=light_states,
    )
    color, inv_z, ids = rasterize(tris, size, scene.backdrop_color)
    depth = encode_depth(inv_z, ids > 0, camera.near, camera.far)
    codes = scene.raster_codes()
    return ConditioningFrame(
        width=size[0],
        height=size[1],
        color=color,
        depth=depth,
        id=ids,
        id_codes=tuple((c, eid) for eid, c in codes.items()),
        pose=pose,
    )


def outline_from_ids(frame: ConditioningFrame) -> np.ndarray:
    """Entity-silhouette line art: white wherever the id buffer changes.

    Stand-in for a dedicated line-art preprocessor; conditioning quality is
    approximate by design.
    """
    ids = frame.id.astype(np.int32)
    edge = np.zeros_like(ids, dtype=bool)
    edge[:, 1:] |= ids[:, 1:] != ids[:, :-1]
    edge[1:, :] |= ids[1:, :] != ids[:-1, :]
    out = np.zeros((frame.height, frame.width), dtype=np.uint8)
    out[edge] = 255
    return out
