"""previz-gen/1 wire protocol: HTTP server and client for the gateway.

One POST submits a job as a multipart body (a JSON manifest part named
`manifest` plus binary frame parts the manifest names); GETs poll status
and fetch results. docs/protocol.md pins the bytes. The server side wraps
any in-process gateway (normally the stub); the client side lets a
deployment point PREVIZ_GEN_BACKEND at a remote generation host.
"""
from __future__ import annotations

import json
import re
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .assets import AssetRef
from .gateway import (
    BackendUnreachable,
    GatewayError,
    ImageJobRequest,
    InvalidRequest,
    JobRecord,
    NotDone,
    UnknownJob,
    VideoJobRequest,
)
from .styling import GuidanceParams, PromptBundle, Region, RegionalConditioning

PROTOCOL = "previz-gen/1"


# ---------------------------------------------------------------------------
# Multipart (the narrow slice of RFC 2046 the protocol uses)


def parse_multipart(body: bytes, content_type: str) -> dict[str, bytes]:
    m = re.search(r'boundary="?([^";]+)"?', content_type)
    if not m:
        raise InvalidRequest("multipart body without boundary")
    delim = b"--" + m.group(1).encode("ascii")
    parts: dict[str, bytes] = {}
    chunks = body.split(delim)
    for chunk in chunks[1:-1]:
        chunk = chunk.lstrip(b"\r\n")
        header_blob, _, payload = chunk.partition(b"\r\n\r\n")
        if payload.endswith(b"\r\n"):
            payload = payload[:-2]
        name = None
        for line in header_blob.split(b"\r\n"):
            if line.lower().startswith(b"content-disposition"):
                nm = re.search(rb'name="([^"]+)"', line)
                if nm:
                    name = nm.group(1).decode("utf-8")
        if name is not None:
            parts[name] = payload
    if not parts:
        raise InvalidRequest("multipart body contained no parts")
    return parts


# ---------------------------------------------------------------------------
# Manifest <-> request objects


def image_manifest(req: ImageJobRequest) -> tuple[dict, dict[str, AssetRef]]:
    """Wire manifest plus the part-name -> asset mapping to upload."""
    parts = {"src:color": req.source_color, "src:depth": req.depth}
    regions = []
    for i, r in enumerate(req.regional.regions):
        entry = {"role": r.role, "prompt": r.prompt, "character_id": r.character_id,
                 "loras": [[a, w] for a, w in r.loras], "mask_part": None}
        if r.mask_ref is not None:
            part = f"mask:{i}"
            parts[part] = AssetRef(hash=r.mask_ref, kind="image/png", size=0)
            entry["mask_part"] = part
        regions.append(entry)
    manifest = {
        "protocol": PROTOCOL,
        "kind": "image",
        "prompts": req.bundle.to_dict(),
        "guidance": req.params.to_dict(),
        "output": {"width": req.output_size[0], "height": req.output_size[1]},
        "regions": regions,
        "parts": sorted(parts.keys()),
    }
    return manifest, parts


def video_manifest(req: VideoJobRequest) -> tuple[dict, dict[str, AssetRef]]:
    parts: dict[str, AssetRef] = {}
    for i, ref in enumerate(req.depth_refs):
        parts[f"seq:depth:{i:04d}"] = ref
    for i, ref in enumerate(req.pose_refs):
        parts[f"seq:pose:{i:04d}"] = ref
    if req.reference_image is not None:
        parts["ref:image"] = req.reference_image
    manifest = {
        "protocol": PROTOCOL,
        "kind": "video",
        "prompts": req.bundle.to_dict(),
        "conditioning_weight": req.conditioning_weight,
        "fps": req.fps,
        "frame_count": req.frame_count,
        "parts": sorted(parts.keys()),
    }
    return manifest, parts


def request_from_manifest(manifest: dict, parts: dict[str, bytes], store):
    """Rebuild a job request server-side; part payloads land in the store."""
    if manifest.get("protocol") != PROTOCOL:
        raise InvalidRequest(f"unsupported protocol {manifest.get('protocol')!r}")
    refs = {name: store.put(data, "image/png") for name, data in parts.items() if name != "manifest"}

    def ref_for(part: Optional[str]) -> Optional[AssetRef]:
        if part is None:
            return None
        if part not in refs:
            raise InvalidRequest(f"manifest names missing part {part!r}")
        return refs[part]

    bundle = PromptBundle.from_dict(manifest["prompts"])
    if manifest["kind"] == "image":
        regions = []
        for entry in manifest["regions"]:
            mask = ref_for(entry.get("mask_part"))
            regions.append(Region(
                role=entry["role"],
                prompt=entry["prompt"],
                mask_ref=None if mask is None else mask.hash,
                character_id=entry.get("character_id"),
                loras=tuple((a, float(w)) for a, w in entry.get("loras", [])),
            ))
        g = manifest["guidance"]
        return ImageJobRequest(
            source_color=ref_for("src:color"),
            depth=ref_for("src:depth"),
            regional=RegionalConditioning(regions=tuple(regions)),
            bundle=bundle,
            params=GuidanceParams(
                total_steps=int(g["total_steps"]),
                skip_steps=int(g["skip_steps"]),
                control_strength=float(g["control_strength"]),
                use_latent_blend=bool(g["use_latent_blend"]),
            ),
            output_size=(int(manifest["output"]["width"]), int(manifest["output"]["height"])),
        )
    if manifest["kind"] == "video":
        depth = tuple(refs[p] for p in sorted(refs) if p.startswith("seq:depth:"))
        pose = tuple(refs[p] for p in sorted(refs) if p.startswith("seq:pose:"))
        return VideoJobRequest(
            depth_refs=depth,
            pose_refs=pose,
            reference_image=refs.get("ref:image"),
            bundle=bundle,
            conditioning_weight=float(manifest["conditioning_weight"]),
            fps=int(manifest["fps"]),
            frame_count=int(manifest["frame_count"]),
        )
    raise InvalidRequest(f"unknown job kind {manifest.get('kind')!r}")


# ---------------------------------------------------------------------------
# Server


def make_gen_app(gateway) -> FastAPI:
    app = FastAPI(title="previz-gen", version="1")

    @app.post("/gen/v1/jobs")
    async def submit(request: Request):
        try:
            parts = parse_multipart(await request.body(), request.headers.get("content-type", ""))
            if "manifest" not in parts:
                raise InvalidRequest("missing manifest part")
            manifest = json.loads(parts.pop("manifest").decode("utf-8"))
            req = request_from_manifest(manifest, parts, gateway.store)
            if manifest["kind"] == "image":
                job_id = gateway.submit_image_job(req)
            else:
                job_id = gateway.submit_video_job(req)
        except InvalidRequest as exc:
            return JSONResponse({"protocol": PROTOCOL, "error": str(exc)}, status_code=400)
        return JSONResponse({"protocol": PROTOCOL, "job_id": job_id}, status_code=202)

    @app.get("/gen/v1/jobs/{job_id}")
    def poll(job_id: str):
        try:
            rec = gateway.poll(job_id)
        except UnknownJob as exc:
            return JSONResponse({"protocol": PROTOCOL, "error": str(exc)}, status_code=404)
        return {"protocol": PROTOCOL, **rec.to_dict()}

    @app.get("/gen/v1/jobs/{job_id}/result")
    def result(job_id: str):
        try:
            refs = gateway.fetch_result(job_id)
        except UnknownJob as exc:
            return JSONResponse({"protocol": PROTOCOL, "error": str(exc)}, status_code=404)
        except NotDone as exc:
            return JSONResponse({"protocol": PROTOCOL, "error": str(exc)}, status_code=409)
        return {
            "protocol": PROTOCOL,
            "artifacts": {k: [r.to_dict() for r in v] for k, v in refs.items()},
        }

    @app.get("/gen/v1/jobs/{job_id}/artifacts/{digest}")
    def artifact(job_id: str, digest: str):
        try:
            refs = gateway.fetch_result(job_id)
        except (UnknownJob, NotDone) as exc:
            return JSONResponse({"protocol": PROTOCOL, "error": str(exc)}, status_code=404)
        for group in refs.values():
            for ref in group:
                if ref.hash == digest:
                    return Response(content=gateway.store.get(ref), media_type=ref.kind)
        return JSONResponse({"protocol": PROTOCOL, "error": f"no artifact {digest}"}, status_code=404)

    return app


# ---------------------------------------------------------------------------
# Client


class RemoteGateway:
    """Client speaking previz-gen/1 to a remote generation host.

    Part payloads are read from the local store on submit; fetched
    artifacts are written back into it, so callers see the same AssetRef
    interface as with the in-process stub.
    """

    def __init__(self, base_url: str, store, client=None, timeout: float = 30.0):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.store = store
        self._client = client or httpx.Client(timeout=timeout)

    def _post_job(self, manifest: dict, parts: dict[str, AssetRef]) -> str:
        import httpx

        files = {"manifest": ("manifest.json", json.dumps(manifest).encode("utf-8"), "application/json")}
        for name, ref in parts.items():
            files[name] = (name, self.store.get(ref.hash), "image/png")
        try:
            resp = self._client.post(f"{self.base_url}/gen/v1/jobs", files=files)
        except httpx.HTTPError as exc:
            raise BackendUnreachable(f"submit failed: {exc}") from exc
        if resp.status_code == 400:
            raise InvalidRequest(resp.json().get("error", "rejected"))
        if resp.status_code != 202:
            raise GatewayError(f"unexpected submit status {resp.status_code}")
        return resp.json()["job_id"]

    def submit_image_job(self, req: ImageJobRequest) -> str:
        manifest, parts = image_manifest(req)
        return self._post_job(manifest, parts)

    def submit_video_job(self, req: VideoJobRequest) -> str:
        manifest, parts = video_manifest(req)
        return self._post_job(manifest, parts)

    def poll(self, job_id: str) -> JobRecord:
        import httpx

        try:
            resp = self._client.get(f"{self.base_url}/gen/v1/jobs/{job_id}")
        except httpx.HTTPError as exc:
            raise BackendUnreachable(f"poll failed: {exc}") from exc
        if resp.status_code == 404:
            raise UnknownJob(f"no job {job_id!r}")
        d = resp.json()
        d.pop("protocol", None)
        return JobRecord.from_dict(d)

    def fetch_result(self, job_id: str) -> dict[str, tuple[AssetRef, ...]]:
        import httpx

        try:
            resp = self._client.get(f"{self.base_url}/gen/v1/jobs/{job_id}/result")
        except httpx.HTTPError as exc:
            raise BackendUnreachable(f"fetch failed: {exc}") from exc
        if resp.status_code == 404:
            raise UnknownJob(f"no job {job_id!r}")
        if resp.status_code == 409:
            raise NotDone(resp.json().get("error", "not done"))
        artifacts = resp.json()["artifacts"]
        out: dict[str, tuple[AssetRef, ...]] = {}
        for key, refs in artifacts.items():
            local = []
            for r in refs:
                blob = self._client.get(
                    f"{self.base_url}/gen/v1/jobs/{job_id}/artifacts/{r['hash']}"
                )
                blob.raise_for_status()
                local.append(self.store.put(blob.content, r["kind"]))
            out[key] = tuple(local)
        return out

    def wait(self, job_id: str, timeout: float = 120.0) -> JobRecord:
        import time

        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            rec = self.poll(job_id)
            if rec.status in ("done", "failed"):
                return rec
            time.sleep(0.05)
        raise GatewayError(f"job {job_id} did not finish within {timeout}s")
