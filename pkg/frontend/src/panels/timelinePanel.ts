/** Timeline panel: track/clip listing, keyframe edits, WASD motion
 * recording, and clip generation with live progress from the job event
 * stream. */
import { ApiClient } from "../api.js";
import { Store } from "../state.js";
import { readEventStream } from "../sse.js";
import type { ClipInfo, PromptFieldsBody, TrackInfo } from "../types.js";

export interface RecordingSession {
  startedAt: number;
  events: { t: number; key: string; pressed: boolean }[];
}

export class TimelinePanel {
  progress: Record<string, number> = {};
  clipJobs: Record<string, string> = {};
  lastError: string | null = null;

  constructor(readonly api: ApiClient, readonly store: Store, readonly baseUrl: string) {}

  tracks(): TrackInfo[] {
    const tl = this.store.project?.timelines.find(
      (t) => t.scene_id === this.store.state.sceneId);
    return tl?.tracks ?? [];
  }

  clips(): ClipInfo[] {
    const tl = this.store.project?.timelines.find(
      (t) => t.scene_id === this.store.state.sceneId);
    return tl?.clips ?? [];
  }

  videoTracks(): { id: string; skeleton_name: string; t0: number }[] {
    return (this.store.project?.video_tracks ?? [])
      .filter((v) => v.scene_id === this.store.state.sceneId);
  }

  /** Viewport key handling appends timed events here while recording. */
  beginRecording(now: number): RecordingSession {
    return { startedAt: now, events: [] };
  }

  captureKey(session: RecordingSession, key: string, pressed: boolean, now: number): void {
    session.events.push({ t: (now - session.startedAt) / 1000, key, pressed });
  }

  async commitRecording(session: RecordingSession, trackId: string, speed: number,
                        start?: number[]): Promise<void> {
    const pid = this.requireProject();
    const sceneId = this.store.state.sceneId!;
    await this.store.mutate(
      (v) => this.api.recordMotion(pid, sceneId, trackId, v, session.events, speed, start));
    await this.store.refresh();
  }

  async addKeyframe(trackId: string, t: number, value: unknown, easing = "linear"): Promise<void> {
    const pid = this.requireProject();
    const sceneId = this.store.state.sceneId!;
    await this.store.mutate(
      (v) => this.api.addKeyframe(pid, sceneId, trackId, v, { t, value, easing }));
    await this.store.refresh();
  }

  /** Submit the clip for video generation and follow the progress stream
   * until it lands, attaching the result to the clip. */
  async generateClip(clipId: string, mode: "resemble" | "creative",
                     fields: PromptFieldsBody, seed = 0,
                     size: [number, number] = [320, 180]): Promise<string> {
    const pid = this.requireProject();
    const sceneId = this.store.state.sceneId!;
    try {
      const resp = await this.api.generate(pid, {
        scene_id: sceneId,
        clip_id: clipId,
        mode,
        fields,
        seed,
        width: size[0],
        height: size[1],
      });
      this.clipJobs[clipId] = resp.job_id;
      this.progress[clipId] = 0;
      this.store.state.version = resp.version; // submissions append history
      this.lastError = null;
      return resp.job_id;
    } catch (err) {
      this.lastError = String(err);
      throw err;
    }
  }

  async followProgress(clipId: string): Promise<void> {
    const jobId = this.clipJobs[clipId];
    if (!jobId) throw new Error(`no job for clip ${clipId}`);
    const events = await readEventStream(
      `${this.baseUrl}/api/v1/jobs/${jobId}/events`,
      (e) => {
        this.progress[clipId] = e.progress;
      },
    );
    const last = events[events.length - 1];
    if (last.status === "failed") {
      this.lastError = last.error ?? "generation failed";
      throw new Error(this.lastError);
    }
    const { artifacts } = await this.api.jobResult(jobId);
    const container = artifacts.container?.[0];
    if (container) {
      const pid = this.requireProject();
      await this.store.mutate((v) => this.api.attachClip(
        pid, this.store.state.sceneId!, clipId, v,
        { video_result: container.hash, status: "generated" }));
      await this.store.refresh();
    }
  }

  private requireProject(): string {
    const pid = this.store.state.projectId;
    if (!pid) throw new Error("no project open");
    return pid;
  }
}
