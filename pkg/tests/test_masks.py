import numpy as np
import pytest

from previz.masks import MaskSet, UnknownCharacterId, masks_from_ids
from previz.raster import ConditioningFrame


def frame_from_ids(ids: np.ndarray, codes):
    h, w = ids.shape
    return ConditioningFrame(
        width=w,
        height=h,
        color=np.zeros((h, w, 3), dtype=np.uint8),
        depth=np.zeros((h, w), dtype=np.uint8),
        id=ids.astype(np.uint16),
        id_codes=tuple(codes),
    )


def disc_ids(size, cx, cy, radius, code):
    ys, xs = np.mgrid[0:size, 0:size]
    ids = np.zeros((size, size), dtype=np.uint16)
    ids[(xs - cx) ** 2 + (ys - cy) ** 2 <= radius ** 2] = code
    return ids


def brute_dilate(binary: np.ndarray, radius: float) -> np.ndarray:
    """Independent circular dilation: direct distance check, no EDT."""
    ys, xs = np.nonzero(binary)
    if len(ys) == 0:
        return binary.copy()
    h, w = binary.shape
    gy, gx = np.mgrid[0:h, 0:w]
    d2 = np.full((h, w), np.inf)
    for y, x in zip(ys, xs):
        d2 = np.minimum(d2, (gy - y) ** 2 + (gx - x) ** 2)
    return d2 <= radius ** 2


def gaussian_blur_reference(alpha: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian with the same truncation rule scipy uses (4 sigma)."""
    radius = int(4.0 * sigma + 0.5)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (xs / sigma) ** 2)
    k /= k.sum()
    padded = np.pad(alpha.astype(np.float64), radius, mode="constant")
    tmp = np.zeros_like(padded)
    for i, kv in enumerate(k):
        tmp += kv * np.roll(padded, i - radius, axis=0)
    out = np.zeros_like(padded)
    for i, kv in enumerate(k):
        out += kv * np.roll(tmp, i - radius, axis=1)
    return out[radius:-radius, radius:-radius]


class TestMasks:
    def test_identity_when_no_expand_no_blur(self):
        ids = disc_ids(64, 30, 30, 9, 1)
        f = frame_from_ids(ids, [(1, "hero")])
        ms = masks_from_ids(f, ["hero"], expand_px=0, blur_sigma=0)
        assert np.array_equal(ms.character("hero"), np.where(ids == 1, 255, 0).astype(np.uint8))
        assert np.array_equal(ms.background, 255 - ms.character("hero"))

    def test_unknown_character(self):
        f = frame_from_ids(disc_ids(32, 16, 16, 5, 1), [(1, "hero")])
        with pytest.raises(UnknownCharacterId):
            masks_from_ids(f, ["ghost"])

    def test_parameter_bounds(self):
        f = frame_from_ids(disc_ids(32, 16, 16, 5, 1), [(1, "hero")])
        with pytest.raises(Exception):
            masks_from_ids(f, ["hero"], expand_px=100)
        with pytest.raises(Exception):
            masks_from_ids(f, ["hero"], blur_sigma=20)

    def test_disc_against_analytic_dilation_oracle(self):
        # paper-range midpoints: expand 15, blur 4.5 on a 10 px disc
        size, cx, cy, r = 128, 64, 64, 10
        ids = disc_ids(size, cx, cy, r, 1)
        f = frame_from_ids(ids, [(1, "hero")])
        ms = masks_from_ids(f, ["hero"], expand_px=15, blur_sigma=4.5)
        got = ms.character("hero")

        dilated = brute_dilate(ids == 1, 15.0)
        expect = gaussian_blur_reference(dilated.astype(np.float64), 4.5)
        expect_u8 = np.clip(np.floor(expect * 255.0 + 0.5), 0, 255).astype(np.uint8)
        assert np.abs(got.astype(int) - expect_u8.astype(int)).max() <= 1

        # dilated disc interior (25 px radius, 1 px margin) stays >= 128
        ys, xs = np.mgrid[0:size, 0:size]
        interior = (xs - cx) ** 2 + (ys - cy) ** 2 <= 24 ** 2
        assert (got[interior] >= 128).all()

    def test_touching_characters_background_zero_on_union(self):
        ids = np.zeros((64, 64), dtype=np.uint16)
        ids[20:40, 10:32] = 1
        ids[20:40, 32:54] = 2
        f = frame_from_ids(ids, [(1, "a"), (2, "b")])
        ms = masks_from_ids(f, ["a", "b"], expand_px=2, blur_sigma=0)
        union = ids > 0
        assert (ms.background[union] == 0).all()

    def test_inversion_identity_enforced(self):
        ids = disc_ids(32, 16, 16, 6, 1)
        with pytest.raises(Exception):
            MaskSet(
                width=32,
                height=32,
                characters=((("hero"), np.where(ids == 1, 255, 0).astype(np.uint8)),),
                background=np.zeros((32, 32), dtype=np.uint8),
            )
