/** Typed /api/v1 client. Every user action in the panels maps to exactly
 * one of these calls. */
import { Transport } from "./transport.js";
import type {
  AssetRef,
  CaptureRefs,
  GuidanceParams,
  JobRecord,
  ProjectDoc,
  PromptFieldsBody,
  ResemblanceLevel,
  SkeletonLayerDoc,
  Stroke,
} from "./types.js";

export class ApiClient {
  constructor(readonly transport: Transport) {}

  createProject(name: string): Promise<{ project_id: string; version: number }> {
    return this.transport.post("/api/v1/projects", { name });
  }

  createDemoProject(): Promise<{ project_id: string; version: number }> {
    return this.transport.post("/api/v1/projects", { demo: true });
  }

  listProjects(): Promise<{ projects: { id: string; name: string; version: number }[] }> {
    return this.transport.get("/api/v1/projects");
  }

  getProject(pid: string): Promise<{ version: number; project: ProjectDoc }> {
    return this.transport.get(`/api/v1/projects/${pid}`);
  }

  appearance(pid: string, sid: string, baseVersion: number, targetId: string,
             color?: number[], intensity?: number): Promise<{ version: number }> {
    return this.transport.patch(`/api/v1/projects/${pid}/scenes/${sid}/appearance`, {
      base_version: baseVersion,
      target_id: targetId,
      color,
      intensity,
    });
  }

  setEntityTransform(pid: string, sid: string, eid: string, baseVersion: number,
                     transform: unknown): Promise<{ version: number }> {
    return this.transport.patch(
      `/api/v1/projects/${pid}/scenes/${sid}/entities/${eid}/transform`,
      { base_version: baseVersion, transform },
    );
  }

  addKeyframe(pid: string, sid: string, trackId: string, baseVersion: number,
              keyframe: { t: number; value: unknown; easing?: string }): Promise<{ version: number }> {
    return this.transport.post(
      `/api/v1/projects/${pid}/timelines/${sid}/tracks/${trackId}/keyframes`,
      { base_version: baseVersion, keyframe },
    );
  }

  recordMotion(pid: string, sid: string, trackId: string, baseVersion: number,
               events: { t: number; key: string; pressed: boolean }[], speed: number,
               start?: number[]): Promise<{ version: number }> {
    return this.transport.post(
      `/api/v1/projects/${pid}/timelines/${sid}/tracks/${trackId}/record`,
      { base_version: baseVersion, events, speed, start },
    );
  }

  attachClip(pid: string, sid: string, clipId: string, baseVersion: number,
             fields: { style_image?: string; video_result?: string; status?: string }):
      Promise<{ version: number }> {
    return this.transport.post(
      `/api/v1/projects/${pid}/timelines/${sid}/clips/${clipId}/attach`,
      { base_version: baseVersion, ...fields },
    );
  }

  capture(pid: string, sceneId: string, opts: { cameraId?: string; t?: number; width: number; height: number }):
      Promise<{ refs: CaptureRefs }> {
    return this.transport.post(`/api/v1/projects/${pid}/capture`, {
      scene_id: sceneId,
      camera_id: opts.cameraId,
      t: opts.t,
      width: opts.width,
      height: opts.height,
    });
  }

  resemblance(level: ResemblanceLevel, totalSteps = 20): Promise<GuidanceParams> {
    return this.transport.get(`/api/v1/resemblance/${level}?total_steps=${totalSteps}`);
  }

  restyle(pid: string, body: {
    scene_id: string;
    t?: number;
    width: number;
    height: number;
    params: GuidanceParams;
    fields: PromptFieldsBody;
    seed?: number;
    clip_id?: string;
  }): Promise<{ job_id: string; version: number; params: GuidanceParams;
                source_refs: { color: AssetRef; depth: AssetRef } }> {
    return this.transport.post(`/api/v1/projects/${pid}/jobs/restyle`, body);
  }

  generate(pid: string, body: {
    scene_id: string;
    clip_id: string;
    mode: "resemble" | "creative";
    weight?: number;
    fields: PromptFieldsBody;
    seed?: number;
    width: number;
    height: number;
  }): Promise<{ job_id: string; version: number; frame_count: number;
                conditioning_weight: number }> {
    return this.transport.post(`/api/v1/projects/${pid}/jobs/generate`, body);
  }

  job(jobId: string): Promise<JobRecord> {
    return this.transport.get(`/api/v1/jobs/${jobId}`);
  }

  jobResult(jobId: string): Promise<{ artifacts: Record<string, AssetRef[]> }> {
    return this.transport.get(`/api/v1/jobs/${jobId}/result`);
  }

  importSkeleton(pid: string, baseVersion: number, name: string, document: string):
      Promise<{ version: number; frames: number; persons: number[]; clamp_warnings: number }> {
    return this.transport.post(`/api/v1/projects/${pid}/skeletons`, {
      base_version: baseVersion,
      name,
      document,
    });
  }

  cropSkeleton(pid: string, baseVersion: number, name: string, t0: number, t1: number,
               newName: string): Promise<{ version: number }> {
    return this.transport.post(`/api/v1/projects/${pid}/skeletons/${name}/crop`, {
      base_version: baseVersion, t0, t1, new_name: newName,
    });
  }

  splitSkeleton(pid: string, name: string): Promise<{ layers: SkeletonLayerDoc[] }> {
    return this.transport.post(`/api/v1/projects/${pid}/skeletons/${name}/split`, {});
  }

  transformLayer(layer: SkeletonLayerDoc, translate: number[], scale: number, anchor: number[]):
      Promise<{ layer: SkeletonLayerDoc; out_of_frame_joints: number }> {
    return this.transport.post(`/api/v1/skeletons/transform`, { layer, translate, scale, anchor });
  }

  recomposite(pid: string, baseVersion: number, name: string, layers: SkeletonLayerDoc[],
              fps: number, duration: number): Promise<{ version: number }> {
    return this.transport.post(`/api/v1/projects/${pid}/skeletons/recomposite`, {
      base_version: baseVersion, name, layers, fps, duration,
    });
  }

  blendLayer(pid: string, layer: SkeletonLayerDoc, sceneId: string, trackId: string,
             cameraId: string): Promise<{ layer: SkeletonLayerDoc }> {
    return this.transport.post(`/api/v1/projects/${pid}/skeletons/blend`, {
      layer, scene_id: sceneId, track_id: trackId, camera_id: cameraId,
    });
  }

  addVideoTrack(pid: string, baseVersion: number, sceneId: string, skeletonName: string,
                t0: number): Promise<{ version: number }> {
    return this.transport.post(`/api/v1/projects/${pid}/video-tracks`, {
      base_version: baseVersion, scene_id: sceneId, skeleton_name: skeletonName, t0,
    });
  }

  videoTracks(pid: string): Promise<{ video_tracks: { id: string; scene_id: string; skeleton_name: string; t0: number }[] }> {
    return this.transport.get(`/api/v1/projects/${pid}/video-tracks`);
  }

  paintMask(width: number, height: number, strokes: Stroke[]): Promise<{ ref: AssetRef }> {
    return this.transport.post(`/api/v1/masks/strokes`, { width, height, strokes });
  }
}
