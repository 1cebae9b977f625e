"""Job-oriented client to the generation backend, plus the deterministic
in-process stub backend.

Jobs run asynchronously on a small worker pool (one worker by default,
matching the roughly serial behaviour of a single-GPU deployment). The
stub turns conditioning inputs into artifacts by a pure function of
(inputs, seed), so the whole system is testable without any model: output
color moves toward the source frame as adherence rises, and every
byte is reproducible.
"""
from __future__ import annotations

import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .assets import AssetRef
from .raster_io import decode_png, encode_png
from .styling import GuidanceParams, PromptBundle, RegionalConditioning, StyleTag

MAX_VIDEO_FRAMES = 81

JOB_STATUSES = ("queued", "running", "done", "failed")


class GatewayError(Exception):
    pass


class InvalidRequest(GatewayError):
    pass


class FrameCountExceeded(InvalidRequest):
    pass


class UnknownJob(GatewayError):
    pass


class NotDone(GatewayError):
    pass


class BackendUnreachable(GatewayError):
    pass


@dataclass(frozen=True)
class ImageJobRequest:
    source_color: AssetRef
    depth: AssetRef
    regional: RegionalConditioning
    bundle: PromptBundle
    params: GuidanceParams
    output_size: tuple[int, int]


@dataclass(frozen=True)
class VideoJobRequest:
    depth_refs: tuple[AssetRef, ...]
    pose_refs: tuple[AssetRef, ...]
    reference_image: Optional[AssetRef]
    bundle: PromptBundle
    conditioning_weight: float
    fps: int
    frame_count: int


@dataclass(frozen=True)
class JobRecord:
    job_id: str
    kind: str  # "image" | "video"
    status: str
    progress: float = 0.0
    submitted_at: float = 0.0
    error: Optional[str] = None
    result: Optional[dict[str, tuple[AssetRef, ...]]] = None
    start_seq: Optional[int] = None  # order the worker picked the job up

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "status": self.status,
            "progress": self.progress,
            "submitted_at": self.submitted_at,
            "error": self.error,
            "result": None if self.result is None else {
                k: [r.to_dict() for r in refs] for k, refs in self.result.items()
            },
        }

    @staticmethod
    def from_dict(d: dict) -> "JobRecord":
        result = d.get("result")
        return JobRecord(
            job_id=d["job_id"],
            kind=d["kind"],
            status=d["status"],
            progress=float(d.get("progress", 0.0)),
            submitted_at=float(d.get("submitted_at", 0.0)),
            error=d.get("error"),
            result=None if result is None else {
                k: tuple(AssetRef.from_dict(r) for r in refs) for k, refs in result.items()
            },
        )


class JobRegistry:
    """Single-writer job table enforcing the status machine:
    queued -> running -> done|failed, no exit from terminal states,
    progress never decreases."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, JobRecord] = {}
        self._start_counter = 0

    def create(self, kind: str) -> JobRecord:
        rec = JobRecord(
            job_id=uuid.uuid4().hex[:12],
            kind=kind,
            status="queued",
            submitted_at=time.time(),
        )
        with self._lock:
            self._jobs[rec.job_id] = rec
        return rec

    def get(self, job_id: str) -> JobRecord:
        with self._lock:
            rec = self._jobs.get(job_id)
        if rec is None:
            raise UnknownJob(f"no job {job_id!r}")
        return rec

    def advance(self, job_id: str, status: str, progress: Optional[float] = None,
                error: Optional[str] = None,
                result: Optional[dict[str, tuple[AssetRef, ...]]] = None) -> JobRecord:
        with self._lock:
            rec = self._jobs.get(job_id)
            if rec is None:
                raise UnknownJob(f"no job {job_id!r}")
            if rec.status in ("done", "failed"):
                return rec  # terminal states are immutable
            allowed = {"queued": ("queued", "running", "failed"),
                       "running": ("running", "done", "failed")}[rec.status]
            if status not in allowed:
                raise GatewayError(f"illegal transition {rec.status} -> {status}")
            new_progress = rec.progress if progress is None else max(rec.progress, progress)
            if status == "done":
                new_progress = 1.0
            start_seq = rec.start_seq
            if rec.status == "queued" and status == "running":
                self._start_counter += 1
                start_seq = self._start_counter
            rec = replace(rec, status=status, progress=new_progress, error=error,
                          result=result if result is not None else rec.result,
                          start_seq=start_seq)
            self._jobs[rec.job_id] = rec
        return rec

    def all_jobs(self) -> list[JobRecord]:
        with self._lock:
            return list(self._jobs.values())


# ---------------------------------------------------------------------------
# Stub generation math


def adherence(params: GuidanceParams) -> float:
    """Scalar in [0,1]: how strongly the stub pulls output toward the
    source frame. Monotone in control strength and in skipped steps."""
    skip_frac = params.skip_steps / params.total_steps
    a = 0.6 * params.control_strength + 1.2 * skip_frac + (0.05 if params.use_latent_blend else 0.0)
    return min(1.0, max(0.0, a))


def _posterize(img: np.ndarray, levels: int) -> np.ndarray:
    step = 255.0 / (levels - 1)
    return np.clip(np.floor(np.floor(img / step + 0.5) * step + 0.5), 0, 255)


def palette_map(style: StyleTag, img: np.ndarray, seed: int) -> np.ndarray:
    """Style-keyed recoloring used by the stub; float64 in, uint8 out."""
    x = img.astype(np.float64)
    if style is StyleTag.ANIME:
        mean = x.mean(axis=2, keepdims=True)
        x = _posterize(np.clip(mean + 1.5 * (x - mean), 0, 255), 5)
    elif style is StyleTag.CARTOON3D:
        x = _posterize(np.clip(x * 1.1 + 12, 0, 255), 7)
    elif style is StyleTag.PIXEL_ART:
        h, w = x.shape[:2]
        block = max(1, min(h, w) // 24)
        small = x[::block, ::block]
        x = np.repeat(np.repeat(small, block, axis=0), block, axis=1)[:h, :w]
        x = _posterize(x, 6)
    elif style is StyleTag.REALISM:
        x = np.clip(255.0 * (x / 255.0) ** 0.9, 0, 255)
    else:  # Cinematic: teal shadows, orange highlights
        lum = x.mean(axis=2, keepdims=True) / 255.0
        teal = np.array([0.0, 60.0, 70.0])
        orange = np.array([70.0, 30.0, -40.0])
        x = np.clip(x + (1.0 - lum) * teal * 0.4 + lum * orange * 0.4, 0, 255)
    rng = np.random.default_rng(seed)
    noise = rng.integers(-6, 7, size=x.shape).astype(np.float64)
    return np.clip(np.floor(x + noise + 0.5), 0, 255).astype(np.uint8)


def _procedural_frame(shape, prompt: str, seed: int, t_index: int) -> np.ndarray:
    """Prompt-keyed drifting gradient for the creative end of the stub."""
    h, w = shape[:2]
    key = (hash_stable(prompt) ^ (seed * 0x9E3779B1)) & 0xFFFFFFFF
    rng = np.random.default_rng(key)
    base = rng.uniform(40, 215, size=3)
    ys = np.linspace(0, 1, h)[:, None, None]
    xs = np.linspace(0, 1, w)[None, :, None]
    phase = t_index / 16.0
    img = base + 60.0 * np.sin(2 * np.pi * (xs + phase)) + 40.0 * np.cos(2 * np.pi * (ys - phase))
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def hash_stable(text: str) -> int:
    h = 2166136261
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 16777619) & 0xFFFFFFFF
    return h


def stub_generate_image(req: ImageJobRequest, store) -> dict[str, tuple[AssetRef, ...]]:
    src = decode_png(store.get(req.source_color))
    stylized = palette_map(req.bundle.style_tag, src, req.bundle.seed).astype(np.float64)
    a = adherence(req.params)
    out = np.clip(np.floor(a * src.astype(np.float64) + (1.0 - a) * stylized + 0.5), 0, 255).astype(np.uint8)

    # region-id debug channel: characters by list position, background last
    regions = np.zeros(src.shape[:2], dtype=np.uint8)
    best = np.zeros(src.shape[:2], dtype=np.uint8)
    for i, region in enumerate(req.regional.regions):
        if region.mask_ref is None:
            continue
        mask = decode_png(store.get(region.mask_ref))
        wins = mask > best
        regions[wins] = i + 1
        best[wins] = mask[wins]

    return {
        "image": (store.put(encode_png(out), "image/png"),),
        "regions": (store.put(encode_png(regions), "image/png"),),
    }


def _conditioning_rgb(depth: Optional[np.ndarray], pose: Optional[np.ndarray]) -> np.ndarray:
    if pose is not None and depth is not None:
        gray = np.repeat(depth[..., None], 3, axis=2)
        return np.maximum(gray, pose)
    if pose is not None:
        return pose
    return np.repeat(depth[..., None], 3, axis=2)


def stub_generate_video(req: VideoJobRequest, store, on_frame=None) -> dict[str, tuple[AssetRef, ...]]:
    from PIL import Image
    import io

    ref_tint = None
    if req.reference_image is not None:
        ref_img = decode_png(store.get(req.reference_image))
        ref_tint = ref_img.reshape(-1, ref_img.shape[-1]).mean(axis=0)

    frame_refs = []
    pil_frames = []
    w = req.conditioning_weight
    for i in range(req.frame_count):
        depth = decode_png(store.get(req.depth_refs[i])) if req.depth_refs else None
        pose = decode_png(store.get(req.pose_refs[i])) if req.pose_refs else None
        cond = _conditioning_rgb(depth, pose)
        styled = palette_map(req.bundle.style_tag, cond, req.bundle.seed).astype(np.float64)
        if ref_tint is not None:
            styled = 0.75 * styled + 0.25 * ref_tint
        creative = _procedural_frame(cond.shape, req.bundle.background_prompt +
                                     (req.bundle.motion_prompt or ""), req.bundle.seed, i)
        out = np.clip(np.floor(w * styled + (1.0 - w) * creative + 0.5), 0, 255).astype(np.uint8)
        frame_refs.append(store.put(encode_png(out), "image/png"))
        pil_frames.append(Image.fromarray(out, mode="RGB"))
        if on_frame:
            on_frame(i)

    buf = io.BytesIO()
    pil_frames[0].save(
        buf, format="GIF", save_all=True, append_images=pil_frames[1:],
        duration=max(1, round(1000 / req.fps)), loop=0,
    )
    container = store.put(buf.getvalue(), "image/gif")
    return {"frames": tuple(frame_refs), "container": (container,)}


# ---------------------------------------------------------------------------
# Gateways


def _validate_image(req: ImageJobRequest, store) -> None:
    for name, ref in (("source_color", req.source_color), ("depth", req.depth)):
        if not store.has(ref.hash):
            raise InvalidRequest(f"dangling {name} ref {ref.hash}")
    for i, region in enumerate(req.regional.regions):
        if region.mask_ref is not None and not store.has(region.mask_ref):
            raise InvalidRequest(f"dangling mask ref {region.mask_ref} (region {i})")
    src = decode_png(store.get(req.source_color))
    dep = decode_png(store.get(req.depth))
    if src.shape[:2] != dep.shape[:2]:
        raise InvalidRequest(f"source {src.shape[:2]} and depth {dep.shape[:2]} sizes disagree")
    if (req.output_size[1], req.output_size[0]) != src.shape[:2]:
        raise InvalidRequest(f"output size {req.output_size} does not match source {src.shape[1::-1]}")


def _validate_video(req: VideoJobRequest, store) -> None:
    if req.frame_count > MAX_VIDEO_FRAMES:
        raise FrameCountExceeded(f"{req.frame_count} frames exceeds the {MAX_VIDEO_FRAMES}-frame limit")
    if req.frame_count <= 0:
        raise InvalidRequest("frame_count must be > 0")
    if not req.depth_refs and not req.pose_refs:
        raise InvalidRequest("need at least one conditioning sequence (depth or pose)")
    for name, refs in (("depth", req.depth_refs), ("pose", req.pose_refs)):
        if refs and len(refs) != req.frame_count:
            raise InvalidRequest(f"{name} sequence has {len(refs)} frames, expected {req.frame_count}")
        for ref in refs:
            if not store.has(ref.hash):
                raise InvalidRequest(f"dangling {name} ref {ref.hash}")
    if req.reference_image is not None and not store.has(req.reference_image.hash):
        raise InvalidRequest(f"dangling reference image ref {req.reference_image.hash}")
    if not (0.0 <= req.conditioning_weight <= 1.0):
        raise InvalidRequest(f"conditioning weight {req.conditioning_weight} outside [0,1]")


class StubGateway:
    """In-process backend: same job lifecycle as a remote deployment, zero
    network. Artifacts land in the supplied asset store."""

    def __init__(self, store, workers: int = 1, latency_s: float = 0.0):
        self.store = store
        self.latency_s = latency_s
        self.registry = JobRegistry()
        self._pool = ThreadPoolExecutor(max_workers=workers)

    def submit_image_job(self, req: ImageJobRequest) -> str:
        _validate_image(req, self.store)
        rec = self.registry.create("image")
        self._pool.submit(self._run_image, rec.job_id, req)
        return rec.job_id

    def submit_video_job(self, req: VideoJobRequest) -> str:
        _validate_video(req, self.store)
        rec = self.registry.create("video")
        self._pool.submit(self._run_video, rec.job_id, req)
        return rec.job_id

    def poll(self, job_id: str) -> JobRecord:
        return self.registry.get(job_id)

    def fetch_result(self, job_id: str) -> dict[str, tuple[AssetRef, ...]]:
        rec = self.registry.get(job_id)
        if rec.status != "done":
            raise NotDone(f"job {job_id} is {rec.status}")
        return rec.result

    def cancel(self, job_id: str) -> JobRecord:
        rec = self.registry.get(job_id)
        if rec.status in ("done", "failed"):
            return rec
        return self.registry.advance(job_id, "failed", error="cancelled")

    def wait(self, job_id: str, timeout: float = 60.0) -> JobRecord:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            rec = self.registry.get(job_id)
            if rec.status in ("done", "failed"):
                return rec
            time.sleep(0.005)
        raise GatewayError(f"job {job_id} did not finish within {timeout}s")

    def _run_image(self, job_id: str, req: ImageJobRequest) -> None:
        try:
            if self.registry.get(job_id).status == "failed":
                return  # cancelled while queued
            self.registry.advance(job_id, "running", progress=0.0)
            steps = req.params.total_steps
            for i in range(steps):
                if self.registry.get(job_id).status == "failed":
                    return
                if self.latency_s:
                    time.sleep(self.latency_s / steps)
                self.registry.advance(job_id, "running", progress=(i + 1) / (steps + 1))
            result = stub_generate_image(req, self.store)
            self.registry.advance(job_id, "done", result=result)
        except Exception as exc:  # surface as failed job, never a dead worker
            self.registry.advance(job_id, "failed", error=str(exc))

    def _run_video(self, job_id: str, req: VideoJobRequest) -> None:
        try:
            if self.registry.get(job_id).status == "failed":
                return
            self.registry.advance(job_id, "running", progress=0.0)

            def on_frame(i):
                if self.latency_s:
                    time.sleep(self.latency_s / req.frame_count)
                self.registry.advance(job_id, "running", progress=(i + 1) / (req.frame_count + 1))

            result = stub_generate_video(req, self.store, on_frame=on_frame)
            self.registry.advance(job_id, "done", result=result)
        except Exception as exc:
            self.registry.advance(job_id, "failed", error=str(exc))


def mean_pixel_distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a.astype(np.float64) - b.astype(np.float64))))
