"""Soft character masks cut from the entity-id buffer.

Each character mask starts as exact id equality, is dilated by a circular
kernel, then Gaussian-blurred. The background mask is always the inverted
composite of the character masks, and that identity is asserted on every
constructed MaskSet.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import ConditioningFrame, RasterError

EXPAND_DEFAULT_PX = 15
BLUR_DEFAULT_SIGMA = 4.5
EXPAND_MAX_PX = 64
BLUR_MAX_SIGMA = 16.0


class UnknownCharacterId(RasterError):
    pass


@dataclass(frozen=True)
class MaskSet:
    width: int
    height: int
    characters: tuple[tuple[str, np.ndarray], ...]  # (entity_id, (h, w) uint8 alpha)
    background: np.ndarray  # (h, w) uint8 alpha

    def __post_init__(self):
        for _, m in self.characters:
            if m.shape != (self.height, self.width):
                raise RasterError("mask dimensions disagree with frame")
            m.flags.writeable = False
        composite = self.composite_characters()
        if not np.array_equal(self.background, 255 - composite):
            raise RasterError("background mask must be the inverted character composite")
        self.background.flags.writeable = False

    def composite_characters(self) -> np.ndarray:
        out = np.zeros((self.height, self.width), dtype=np.uint8)
        for _, m in self.characters:
            np.maximum(out, m, out=out)
        return out

    def character(self, entity_id: str) -> np.ndarray:
        for eid, m in self.characters:
            if eid == entity_id:
                return m
        raise UnknownCharacterId(f"no mask for {entity_id!r}")


def _soften(binary: np.ndarray, expand_px: float, blur_sigma: float) -> np.ndarray:
    mask = binary
    if expand_px > 0 and mask.any():
        # Exact circular dilation: keep everything within expand_px of the set.
        dist = ndimage.distance_transform_edt(~mask)
        mask = dist <= expand_px
    alpha = mask.astype(np.float64)
    if blur_sigma > 0:
        alpha = ndimage.gaussian_filter(alpha, sigma=blur_sigma, mode="constant", cval=0.0)
    return np.clip(np.floor(alpha * 255.0 + 0.5), 0.0, 255.0).astype(np.uint8)


def rasterize_strokes(width: int, height: int, strokes: list[dict]) -> np.ndarray:
    """Paint brush strokes into an alpha mask (for the inpainting composer).

    Strokes are dicts with x0,y0,x1,y1 in [0,1], radius in pixels, and an
    optional erase flag. Painting is hard-edged; callers soften via the
    usual expand/blur path if needed.
    """
    alpha = np.zeros((height, width), dtype=np.uint8)
    ys, xs = np.mgrid[0:height, 0:width]
    cx = xs + 0.5
    cy = ys + 0.5
    for s in strokes:
        p0 = np.array([float(s["x0"]) * width, float(s["y0"]) * height])
        p1 = np.array([float(s.get("x1", s["x0"])) * width, float(s.get("y1", s["y0"])) * height])
        r = float(s.get("radius", 8.0))
        d = p1 - p0
        len2 = float(d @ d)
        if len2 == 0.0:
            dist = np.hypot(cx - p0[0], cy - p0[1])
        else:
            u = np.clip(((cx - p0[0]) * d[0] + (cy - p0[1]) * d[1]) / len2, 0.0, 1.0)
            dist = np.hypot(cx - (p0[0] + u * d[0]), cy - (p0[1] + u * d[1]))
        hit = dist <= r
        alpha[hit] = 0 if s.get("erase") else 255
    return alpha


def masks_from_ids(
    frame: ConditioningFrame,
    character_ids: list[str],
    expand_px: float = EXPAND_DEFAULT_PX,
    blur_sigma: float = BLUR_DEFAULT_SIGMA,
) -> MaskSet:
    """Per-character soft masks plus the inverted-composite background mask."""
    if not (0 <= expand_px <= EXPAND_MAX_PX):
        raise RasterError(f"expand_px {expand_px} outside [0, {EXPAND_MAX_PX}]")
    if not (0 <= blur_sigma <= BLUR_MAX_SIGMA):
        raise RasterError(f"blur_sigma {blur_sigma} outside [0, {BLUR_MAX_SIGMA}]")
    code_map = dict((eid, code) for code, eid in frame.id_codes)
    chars = []
    for cid in character_ids:
        if cid not in code_map:
            raise UnknownCharacterId(f"{cid!r} is not an entity of this frame")
        binary = frame.id == code_map[cid]
        chars.append((cid, _soften(binary, expand_px, blur_sigma)))
    composite = np.zeros((frame.height, frame.width), dtype=np.uint8)
    for _, m in chars:
        np.maximum(composite, m, out=composite)
    return MaskSet(
        width=frame.width,
        height=frame.height,
        characters=tuple(chars),
        background=255 - composite,
    )
