/** Wire shapes shared across panels; they mirror the /api/v1 schemas. */

export interface AssetRef {
  hash: string;
  kind: string;
  size: number;
}

export interface GuidanceParams {
  total_steps: number;
  skip_steps: number;
  control_strength: number;
  use_latent_blend: boolean;
}

export type ResemblanceLevel = "strict" | "faithful" | "flexible" | "loose";
export const RESEMBLANCE_ORDER: ResemblanceLevel[] = ["strict", "faithful", "flexible", "loose"];

export type StyleTag = "Anime" | "Cartoon3D" | "PixelArt" | "Realism" | "Cinematic";

export interface PromptFieldsBody {
  style: StyleTag;
  mood_tone: string;
  genre: string;
  background_description: string;
  motion_prompt?: string;
}

export interface ClipInfo {
  id: string;
  camera_id: string;
  t_in: number;
  t_out: number;
  fps: number;
  status: string;
  attached_style_image: string | null;
  attached_video_result: string | null;
}

export interface TrackInfo {
  id: string;
  kind: string;
  target_id: string;
  prop: string;
  keyframes: { t: number; value: unknown; easing: string }[];
  motion_paths: { entity_id: string; source: string; samples: [number, number[], number][] }[];
}

export interface ProjectDoc {
  id: string;
  name: string;
  scenes: SceneDoc[];
  timelines: { scene_id: string; tracks: TrackInfo[]; clips: ClipInfo[] }[];
  skeletons: Record<string, string>;
  video_tracks: { id: string; scene_id: string; skeleton_name: string; t0: number }[];
  profiles: { character_id: string; display_name: string; identity_prompt: string }[];
  history: { job: JobRecord; clip_id: string | null; label: string; superseded: boolean }[];
}

export interface SceneDoc {
  id: string;
  entities: EntityDoc[];
  cameras: { id: string; fov_deg: number; near: number; far: number; label: string; transform: TransformDoc }[];
  lights: { id: string; kind: string; color: number[]; intensity: number; transform: TransformDoc }[];
  backdrop_color: number[];
}

export interface EntityDoc {
  id: string;
  name: string;
  role: string;
  movable: boolean;
  base_color: number[];
  transform: TransformDoc;
  geometry: { kind: string; vertices?: number[][]; triangles?: number[][] };
}

export interface TransformDoc {
  translation: number[];
  rotation: number[];
  scale: number[];
}

export interface JobRecord {
  job_id: string;
  kind: string;
  status: "queued" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
  result: Record<string, AssetRef[]> | null;
}

export interface SkeletonLayerDoc {
  person_id: number;
  fps: number;
  placement: { translate: number[]; scale: number; anchor: number[] };
  frames: (number[][] | null)[];
}

export interface CaptureRefs {
  color: AssetRef;
  depth: AssetRef;
  id: AssetRef;
  pose?: AssetRef;
}

export interface Stroke {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  radius: number;
  erase?: boolean;
}
