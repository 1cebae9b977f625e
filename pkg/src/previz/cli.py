"""Headless command line: demo, validate, render, restyle, generate, remix,
serve. Errors print one JSON line to stderr and exit nonzero."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .assets import FileAssetStore, MemoryAssetStore
from .gateway import (
    ImageJobRequest,
    StubGateway,
    VideoJobRequest,
    mean_pixel_distance,
)
from .masks import masks_from_ids
from .pose_overlay import render_pose_overlay, rig_overlay_for_frame
from .project import load_project, save_project, validate_project
from .raster import render_frame
from .raster_io import decode_png, encode_png, export_sequence
from .report import write_restyle_report
from .scene import Scene
from .service import BACKEND_ENV, ServiceConfig, create_app
from .skelio import dump_document, parse_document
from .skeleton import crop, recomposite, split_layers, transform_layer
from .styling import (
    PromptFields,
    ResemblanceLevel,
    StyleTag,
    VideoGuidanceMode,
    assemble_regional,
    compose_prompt,
    resemblance_params,
    video_guidance,
)
from .timeline import compose_sequence, frame_plan_table
from .walkthrough import DEMO_MOTION_PROMPT, DEMO_PROMPT_FIELDS, demo_project

LEVEL_ORDER = [ResemblanceLevel.STRICT, ResemblanceLevel.FAITHFUL,
               ResemblanceLevel.FLEXIBLE, ResemblanceLevel.LOOSE]


class CliError(Exception):
    pass


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise CliError(f"size must look like 320x180, got {text!r}") from None


def _gateway(store):
    backend = os.environ.get(BACKEND_ENV, "stub")
    if backend == "stub":
        return StubGateway(store)
    from .genwire import RemoteGateway

    return RemoteGateway(backend, store)


def _find_clip(project, clip_id: str):
    for timeline in project.timelines:
        for clip in timeline.clips:
            if clip.id == clip_id:
                return project.scene(timeline.scene_id), timeline, clip
    raise CliError(f"no clip {clip_id!r} in project {project.id!r}")


def _render_plan_frames(scene: Scene, plan, size, with_pose=True):
    frames = []
    for fs in plan.frames:
        pose = rig_overlay_for_frame(scene, fs, size) if with_pose else None
        frames.append(render_frame(
            scene, scene.camera(fs.camera_id), size,
            camera_transform=fs.camera_transform,
            fov_deg=fs.fov_deg,
            entity_transforms=fs.entity_transform_map(),
            entity_colors=fs.entity_color_map(),
            light_states=fs.light_state_map(),
            pose=pose,
        ))
    return frames


def cmd_demo(args) -> int:
    out = Path(args.out)
    project = demo_project()
    path = save_project(project, out / "project.json")
    (out / "assets").mkdir(parents=True, exist_ok=True)
    print(json.dumps({"project": str(path), "id": project.id,
                      "scenes": [s.id for s in project.scenes]}))
    return 0


def cmd_validate(args) -> int:
    project = load_project(args.project)
    problems = validate_project(project)
    print(json.dumps({"ok": not problems, "problems": problems}))
    return 0 if not problems else 1


def cmd_render(args) -> int:
    project = load_project(args.project)
    scene, timeline, clip = _find_clip(project, args.clip)
    fps = args.fps or clip.fps
    plan = compose_sequence(scene, timeline, clip.t_in, clip.t_out, fps)
    frames = _render_plan_frames(scene, plan, _size(args.size), with_pose=not args.no_pose)
    manifest = export_sequence(frames, args.out, fps)
    if args.plan_table:
        (Path(args.out) / "frame_plan.txt").write_text(frame_plan_table(plan), encoding="utf-8")
    print(json.dumps({
        "out": str(args.out),
        "frames": manifest["frame_count"],
        "channels": sorted(manifest["channels"].keys()),
    }))
    return 0


def _prompt_fields(args, profiles) -> PromptFields:
    return PromptFields(
        style=StyleTag.parse(args.style),
        mood_tone=args.mood,
        genre=args.genre,
        background_description=args.description,
        characters=tuple(profiles),
        motion_prompt=getattr(args, "motion", None),
    )


def cmd_restyle(args) -> int:
    project = load_project(args.project)
    scene, timeline, clip = _find_clip(project, args.clip)
    size = _size(args.size)
    t = clip.t_in + args.frame / clip.fps
    plan = compose_sequence(scene, timeline, t, t + 1.0 / clip.fps, clip.fps)
    fs = plan.frames[0]
    pose = rig_overlay_for_frame(scene, fs, size)
    frame = render_frame(
        scene, scene.camera(fs.camera_id), size,
        camera_transform=fs.camera_transform, fov_deg=fs.fov_deg,
        entity_transforms=fs.entity_transform_map(),
        entity_colors=fs.entity_color_map(),
        light_states=fs.light_state_map(),
        pose=pose,
    )

    import numpy as np

    present = set(int(v) for v in np.unique(frame.id) if v)
    character_ids = [e.id for e in scene.entities
                     if e.role == "character" and e.character_profile_ref
                     and frame.code_for(e.id) in present]
    profiles = [project.profile(scene.entity(c).character_profile_ref) for c in character_ids]
    mask_set = masks_from_ids(frame, character_ids, args.expand, args.blur)
    bundle = compose_prompt(_prompt_fields(args, profiles), seed=args.seed)

    store = MemoryAssetStore() if os.environ.get(BACKEND_ENV, "stub") == "stub" else FileAssetStore(Path(args.out) / "store")
    gateway = _gateway(store)
    regional = assemble_regional(mask_set, profiles, bundle, store=store, registry=project.registry)
    src_ref = store.put(encode_png(frame.color), "image/png")
    depth_ref = store.put(encode_png(frame.depth), "image/png")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "source_color.png").write_bytes(store.get(src_ref))
    (out / "source_depth.png").write_bytes(store.get(depth_ref))

    rows = []
    requested_level = ResemblanceLevel.parse(args.level)
    for level in LEVEL_ORDER:
        params = resemblance_params(level, args.steps)
        req = ImageJobRequest(
            source_color=src_ref, depth=depth_ref, regional=regional,
            bundle=bundle, params=params, output_size=size,
        )
        job_id = gateway.submit_image_job(req)
        rec = gateway.wait(job_id, timeout=120)
        if rec.status != "done":
            raise CliError(f"restyle job failed: {rec.error}")
        image_ref = gateway.fetch_result(job_id)["image"][0]
        name = f"restyled_{level.value}.png"
        (out / name).write_bytes(store.get(image_ref))
        rows.append({
            "level": level.value,
            "skip_steps": params.skip_steps,
            "control_strength": params.control_strength,
            "latent_blend": params.use_latent_blend,
            "mean_pixel_distance": round(
                mean_pixel_distance(frame.color, decode_png(store.get(image_ref))), 4),
            "artifact": name,
        })
    (out / "result.png").write_bytes((out / f"restyled_{requested_level.value}.png").read_bytes())
    csv_path, fig_path = write_restyle_report(out, rows)
    print(json.dumps({
        "out": str(out),
        "level": requested_level.value,
        "report": str(csv_path),
        "figure": str(fig_path),
        "distances": {r["level"]: r["mean_pixel_distance"] for r in rows},
    }))
    return 0


def cmd_generate(args) -> int:
    project = load_project(args.project)
    scene, timeline, clip = _find_clip(project, args.clip)
    size = _size(args.size)
    plan = compose_sequence(scene, timeline, clip.t_in, clip.t_out, clip.fps)
    frames = _render_plan_frames(scene, plan, size)

    store = MemoryAssetStore() if os.environ.get(BACKEND_ENV, "stub") == "stub" else FileAssetStore(Path(args.out) / "store")
    gateway = _gateway(store)
    depth_refs = tuple(store.put(encode_png(f.depth), "image/png") for f in frames)
    pose_refs = tuple(
        store.put(encode_png(f.pose if f.pose is not None else (f.color * 0)), "image/png")
        for f in frames
    )
    profiles = list(project.profiles)
    bundle = compose_prompt(_prompt_fields(args, profiles), seed=args.seed)
    weight = video_guidance(VideoGuidanceMode(args.mode), args.weight)
    req = VideoJobRequest(
        depth_refs=depth_refs,
        pose_refs=pose_refs,
        reference_image=None,
        bundle=bundle,
        conditioning_weight=weight,
        fps=clip.fps,
        frame_count=len(frames),
    )
    job_id = gateway.submit_video_job(req)
    rec = gateway.wait(job_id, timeout=300)
    if rec.status != "done":
        raise CliError(f"video job failed: {rec.error}")
    result = gateway.fetch_result(job_id)
    out = Path(args.out)
    frames_dir = out / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    for i, ref in enumerate(result["frames"]):
        (frames_dir / f"frame_{i:04d}.png").write_bytes(store.get(ref))
    gif_path = out / "clip.gif"
    gif_path.write_bytes(store.get(result["container"][0]))
    manifest = {
        "clip": clip.id,
        "fps": clip.fps,
        "frame_count": len(frames),
        "conditioning_weight": weight,
        "container": gif_path.name,
    }
    (out / "generate_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(json.dumps({"out": str(out), "frames": len(frames), "container": str(gif_path)}))
    return 0


def cmd_remix(args) -> int:
    script = Path(args.script).read_text(encoding="utf-8")
    seq = None
    layers = None
    base = Path(args.script).parent
    emitted = []
    for ln_no, raw in enumerate(script.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        op, *rest = line.split()
        try:
            if op == "load":
                seq = parse_document(Path(base, rest[0]).read_text(encoding="utf-8")).sequence
            elif op == "crop":
                seq = crop(seq, float(rest[0]), float(rest[1]))
            elif op == "split":
                layers = split_layers(seq)
            elif op == "transform":
                pid = int(rest[0])
                dx, dy, scale = float(rest[1]), float(rest[2]), float(rest[3])
                anchor = (float(rest[4]), float(rest[5])) if len(rest) > 5 else (0.5, 0.5)
                layers = [
                    transform_layer(l, translate=(dx, dy), scale=scale, anchor=anchor)
                    if l.person_id == pid else l
                    for l in layers
                ]
            elif op == "recomposite":
                seq = recomposite(layers, fps=float(rest[0]), duration=float(rest[1]),
                                  source_size=seq.source_size)
                layers = None
            elif op == "save":
                path = Path(base, rest[0])
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(dump_document(seq), encoding="utf-8")
                emitted.append(str(path))
            elif op == "overlays":
                out = Path(base, rest[0])
                out.mkdir(parents=True, exist_ok=True)
                w, h = int(rest[1]), int(rest[2])
                for i, frame in enumerate(seq.frames):
                    img = render_pose_overlay([p.joints for p in frame.persons], (w, h))
                    (out / f"pose_{i:04d}.png").write_bytes(encode_png(img))
                emitted.append(str(out))
            else:
                raise CliError(f"unknown remix op {op!r}")
        except (IndexError, TypeError) as exc:
            raise CliError(f"line {ln_no}: malformed {op!r} ({exc})") from None
        except AttributeError:
            raise CliError(f"line {ln_no}: {op!r} before a sequence is loaded") from None
    print(json.dumps({"script": str(args.script), "outputs": emitted}))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    config = ServiceConfig(
        asset_dir=args.assets,
        backend=os.environ.get(BACKEND_ENV, "stub"),
        latency_s=args.latency,
    )
    uvicorn.run(create_app(config), host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_gen_serve(args) -> int:
    """Host the previz-gen/1 protocol over the stub (a stand-in for the
    real generation host during integration work)."""
    import uvicorn

    from .genwire import make_gen_app

    store = FileAssetStore(args.assets) if args.assets else MemoryAssetStore()
    gateway = StubGateway(store, workers=args.workers, latency_s=args.latency)
    uvicorn.run(make_gen_app(gateway), host=args.host, port=args.port, log_level="warning")
    return 0


def _add_prompt_args(p: argparse.ArgumentParser):
    p.add_argument("--style", default=DEMO_PROMPT_FIELDS["style"])
    p.add_argument("--mood", default=DEMO_PROMPT_FIELDS["mood_tone"])
    p.add_argument("--genre", default=DEMO_PROMPT_FIELDS["genre"])
    p.add_argument("--description", default=DEMO_PROMPT_FIELDS["background_description"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="previz", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="write the walkthrough demo project")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_demo)

    p = sub.add_parser("validate", help="check project integrity")
    p.add_argument("project")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("render", help="render a clip's conditioning sequence")
    p.add_argument("project")
    p.add_argument("--clip", required=True)
    p.add_argument("--fps", type=int, default=None)
    p.add_argument("--size", default="320x180")
    p.add_argument("--out", required=True)
    p.add_argument("--no-pose", action="store_true")
    p.add_argument("--plan-table", action="store_true", help="also dump the frame plan as text")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("restyle", help="restyle one frame at every resemblance level")
    p.add_argument("project")
    p.add_argument("--clip", required=True)
    p.add_argument("--frame", type=int, default=16, help="frame index within the clip")
    p.add_argument("--level", default="faithful")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", default="320x180")
    p.add_argument("--expand", type=float, default=15.0)
    p.add_argument("--blur", type=float, default=4.5)
    p.add_argument("--out", required=True)
    _add_prompt_args(p)
    p.set_defaults(fn=cmd_restyle)

    p = sub.add_parser("generate", help="generate a video for a clip via the backend")
    p.add_argument("project")
    p.add_argument("--clip", required=True)
    p.add_argument("--mode", choices=["resemble", "creative"], default="resemble")
    p.add_argument("--weight", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", default="320x180")
    p.add_argument("--out", required=True)
    p.add_argument("--motion", default=DEMO_MOTION_PROMPT)
    _add_prompt_args(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("remix", help="run skeleton ops from a script file")
    p.add_argument("script")
    p.set_defaults(fn=cmd_remix)

    p = sub.add_parser("serve", help="run the /api/v1 service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("PREVIZ_PORT", "4700")))
    p.add_argument("--assets", default=None)
    p.add_argument("--latency", type=float, default=0.0)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("gen-serve", help="host the previz-gen/1 stub backend over HTTP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=4800)
    p.add_argument("--assets", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--latency", type=float, default=0.0)
    p.set_defaults(fn=cmd_gen_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    except Exception as exc:  # domain errors become machine-readable too
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
