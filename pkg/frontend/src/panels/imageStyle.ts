/** Image Style panel: prompt fields, the four-stop resemblance control,
 * restyle submission, and the source/output comparison slider. */
import { ApiClient } from "../api.js";
import { Store } from "../state.js";
import type { AssetRef, GuidanceParams, PromptFieldsBody, ResemblanceLevel } from "../types.js";
import { RESEMBLANCE_ORDER } from "../types.js";

export interface ComparisonView {
  /** Asset drawn underneath (the raw conditioning frame). */
  source: AssetRef | null;
  /** Asset drawn on top (the restyled output). */
  output: AssetRef | null;
  /** Opacity of the output layer; 0 shows pure source, 1 pure output. */
  outputOpacity: number;
}

export class ImageStylePanel {
  level: ResemblanceLevel = "faithful";
  params: GuidanceParams | null = null;
  fields: PromptFieldsBody = {
    style: "Cinematic",
    mood_tone: "",
    genre: "",
    background_description: "",
  };
  seed = 0;
  size: [number, number] = [320, 180];
  sourceRef: AssetRef | null = null;
  outputRef: AssetRef | null = null;
  activeJob: string | null = null;
  lastError: string | null = null;

  constructor(readonly api: ApiClient, readonly store: Store) {}

  /** Dragging the resemblance control snaps to one of the four stops and
   * fetches that stop's exact guidance parameters from the server, so the
   * later restyle request carries them verbatim on the wire. */
  async setResemblance(position: number | ResemblanceLevel): Promise<GuidanceParams> {
    const level = typeof position === "string"
      ? position
      : RESEMBLANCE_ORDER[Math.min(3, Math.max(0, Math.round(position * 3)))];
    this.level = level;
    this.params = await this.api.resemblance(level);
    return this.params;
  }

  async submitRestyle(t?: number): Promise<string> {
    const pid = this.store.state.projectId;
    const sceneId = this.store.state.sceneId;
    if (!pid || !sceneId) throw new Error("no project/scene selected");
    if (!this.params) await this.setResemblance(this.level);
    try {
      const resp = await this.api.restyle(pid, {
        scene_id: sceneId,
        t,
        width: this.size[0],
        height: this.size[1],
        params: this.params!,
        fields: this.fields,
        seed: this.seed,
        clip_id: this.store.state.clipId ?? undefined,
      });
      this.sourceRef = resp.source_refs.color;
      this.activeJob = resp.job_id;
      this.store.state.version = resp.version; // submissions append history
      this.lastError = null;
      return resp.job_id;
    } catch (err) {
      this.lastError = String(err);
      throw err;
    }
  }

  async pollUntilDone(intervalMs = 20, timeoutMs = 60_000): Promise<void> {
    if (!this.activeJob) throw new Error("no job in flight");
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const rec = await this.api.job(this.activeJob);
      if (rec.status === "done") break;
      if (rec.status === "failed") {
        this.lastError = rec.error ?? "generation failed";
        throw new Error(this.lastError);
      }
      if (Date.now() > deadline) throw new Error("job timed out");
      await new Promise((r) => setTimeout(r, intervalMs));
    }
    const { artifacts } = await this.api.jobResult(this.activeJob);
    this.outputRef = artifacts.image?.[0] ?? null;
  }

  /** The comparison slider maps directly onto layer opacity: 0 is the pure
   * 3D source frame, 1 the pure restyled output. */
  comparison(): ComparisonView {
    return {
      source: this.sourceRef,
      output: this.outputRef,
      outputOpacity: this.store.state.comparisonSlider,
    };
  }

  /** The asset a screenshot of the panel would show at the slider ends. */
  displayedAsset(): AssetRef | null {
    const slider = this.store.state.comparisonSlider;
    if (slider <= 0) return this.sourceRef;
    if (slider >= 1) return this.outputRef ?? this.sourceRef;
    return this.outputRef ?? this.sourceRef;
  }
}
