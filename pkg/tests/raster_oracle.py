"""Reference renderers used only by tests.

`raycast_ids` answers, for every pixel center, which screen-space triangle
is nearest along the view ray — brute force, one pixel at a time, with no
scanline machinery, no incremental edge stepping, and no z-buffer. It
shares only the projection/snap front end with the production rasterizer
(they must answer for the same geometry); coverage and occlusion logic are
written independently.

`world_raycast_ids` is a fully independent 3D Moller-Trumbore caster used
as a sanity check; it sees unsnapped world geometry, so comparisons must
tolerate pixels that sit on id boundaries.
"""
from __future__ import annotations

import math

import numpy as np

from previz.geometry import Vec3
from previz.raster import SUBPIXEL, ScreenTriangle
from previz.scene import fov_tangents


def _orient(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def _top_left(ax, ay, bx, by):
    return (ay == by and bx < ax) or (by > ay)


def raycast_ids(tris: list[ScreenTriangle], size: tuple[int, int]):
    """(ids, inv_z) by per-pixel nearest-hit search over all triangles."""
    w, h = size
    ids = np.zeros((h, w), dtype=np.uint16)
    best = np.zeros((h, w), dtype=np.float64)

    prepared = []
    for tri in tris:
        (x0, y0), (x1, y1), (x2, y2) = tri.xy
        iz0, iz1, iz2 = tri.inv_z
        area = _orient(x0, y0, x1, y1, x2, y2)
        if area == 0:
            continue
        if area < 0:
            x1, y1, x2, y2 = x2, y2, x1, y1
            iz1, iz2 = iz2, iz1
            area = -area
        prepared.append((x0, y0, x1, y1, x2, y2, iz0, iz1, iz2, area, tri.code))

    half = SUBPIXEL // 2
    for j in range(h):
        py = j * SUBPIXEL + half
        for i in range(w):
            px = i * SUBPIXEL + half
            hit_code = 0
            hit_z = 0.0
            for (x0, y0, x1, y1, x2, y2, iz0, iz1, iz2, area, code) in prepared:
                w0 = _orient(x1, y1, x2, y2, px, py)
                w1 = _orient(x2, y2, x0, y0, px, py)
                w2 = _orient(x0, y0, x1, y1, px, py)
                if (w0 + (0 if _top_left(x1, y1, x2, y2) else -1)) < 0:
                    continue
                if (w1 + (0 if _top_left(x2, y2, x0, y0) else -1)) < 0:
                    continue
                if (w2 + (0 if _top_left(x0, y0, x1, y1) else -1)) < 0:
                    continue
                zi = (w0 * iz0 + w1 * iz1 + w2 * iz2) / float(area)
                if zi > hit_z:
                    hit_z = zi
                    hit_code = code
            ids[j, i] = hit_code
            best[j, i] = hit_z
    return ids, best


def _gather_world_triangles(scene, entity_transforms=None):
    out = []
    codes = scene.raster_codes()
    xf_map = entity_transforms or {}
    for entity in scene.entities:
        xf = xf_map.get(entity.id, entity.transform)
        for tri in entity.geometry.local_triangles():
            out.append((tuple(xf.apply(v) for v in tri), codes[entity.id]))
    return out


def world_raycast_ids(scene, camera, size, entity_transforms=None):
    """3D ray-cast ids; independent of projection, snapping, everything."""
    w, h = size
    tx, ty = fov_tangents(camera.fov_deg, w, h)
    xf = camera.transform
    origin = xf.translation
    ids = np.zeros((h, w), dtype=np.uint16)
    tris = _gather_world_triangles(scene, entity_transforms)
    for j in range(h):
        for i in range(w):
            ndc_x = 2.0 * (i + 0.5) / w - 1.0
            ndc_y = 1.0 - 2.0 * (j + 0.5) / h
            d_cam = Vec3(ndc_x * tx, ndc_y * ty, -1.0)
            d = xf.rotation.rotate(d_cam)
            best_t, best_code = math.inf, 0
            for (a, b, c), code in tris:
                t = _moller_trumbore(origin, d, a, b, c)
                if t is not None and camera.near <= t < best_t:
                    best_t, best_code = t, code
            ids[j, i] = best_code
    return ids


def _moller_trumbore(o, d, a, b, c):
    e1, e2 = b - a, c - a
    p = d.cross(e2)
    det = e1.dot(p)
    if abs(det) < 1e-14:
        return None
    inv = 1.0 / det
    s = o - a
    u = s.dot(p) * inv
    if u < 0.0 or u > 1.0:
        return None
    q = s.cross(e1)
    v = d.dot(q) * inv
    if v < 0.0 or u + v > 1.0:
        return None
    t = e2.dot(q) * inv
    return t if t > 0.0 else None
