"""PNG encoding and numbered frame-sequence export with a manifest.

Channel encodings: color/pose 8-bit RGB, depth/masks 8-bit gray, id 16-bit
gray. Sequences are zero-padded numbered files plus manifest.json listing
fps, size, and the channel files.
"""
from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .raster import ConditioningFrame


def encode_png(buf: np.ndarray) -> bytes:
    if buf.ndim == 3:
        img = Image.fromarray(buf, mode="RGB")
    elif buf.dtype == np.uint16:
        img = Image.fromarray(buf)  # maps to 16-bit gray ("I;16")
    else:
        img = Image.fromarray(buf, mode="L")
    out = io.BytesIO()
    img.save(out, format="PNG")
    return out.getvalue()


def decode_png(data: bytes) -> np.ndarray:
    img = Image.open(io.BytesIO(data))
    if img.mode == "I;16":
        return np.asarray(img, dtype=np.uint16)
    if img.mode not in ("RGB", "L"):
        img = img.convert("RGB")
    return np.asarray(img)


def frame_channels(frame: ConditioningFrame) -> dict[str, np.ndarray]:
    channels = {"color": frame.color, "depth": frame.depth, "id": frame.id}
    if frame.pose is not None:
        channels["pose"] = frame.pose
    return channels


def export_sequence(
    frames: list[ConditioningFrame],
    out_dir,
    fps: int,
    channels: list[str] = None,
) -> dict:
    """Write <channel>_<0000>.png per frame plus manifest.json; returns the
    manifest dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not frames:
        raise ValueError("no frames to export")
    names = channels or list(frame_channels(frames[0]).keys())
    files: dict[str, list[str]] = {c: [] for c in names}
    for i, frame in enumerate(frames):
        chans = frame_channels(frame)
        for c in names:
            if c not in chans:
                raise ValueError(f"frame {i} has no channel {c!r}")
            name = f"{c}_{i:04d}.png"
            (out / name).write_bytes(encode_png(chans[c]))
            files[c].append(name)
    manifest = {
        "fps": fps,
        "width": frames[0].width,
        "height": frames[0].height,
        "frame_count": len(frames),
        "channels": {c: files[c] for c in names},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
