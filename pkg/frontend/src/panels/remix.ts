/** Video Remix Editor: split a sequence into per-person layers, resize and
 * reposition them, optionally re-anchor one onto a 3D motion path, then
 * recomposite into a guidance sequence in the project library. */
import { ApiClient } from "../api.js";
import { Store } from "../state.js";
import type { SkeletonLayerDoc } from "../types.js";

export class RemixEditor {
  layers: SkeletonLayerDoc[] = [];
  outOfFrame: Record<number, number> = {};
  lastError: string | null = null;

  constructor(readonly api: ApiClient, readonly store: Store, readonly sourceName: string) {}

  async open(): Promise<void> {
    const pid = this.requireProject();
    const resp = await this.api.splitSkeleton(pid, this.sourceName);
    this.layers = resp.layers;
  }

  layer(personId: number): SkeletonLayerDoc {
    const found = this.layers.find((l) => l.person_id === personId);
    if (!found) throw new Error(`no layer for person ${personId}`);
    return found;
  }

  /** Resize/reposition one split segment (placement applies uniformly). */
  async transform(personId: number, translate: [number, number], scale: number,
                  anchor: [number, number] = [0.5, 0.5]): Promise<void> {
    try {
      const resp = await this.api.transformLayer(this.layer(personId), translate, scale, anchor);
      this.layers = this.layers.map((l) => (l.person_id === personId ? resp.layer : l));
      this.outOfFrame[personId] = resp.out_of_frame_joints;
      this.lastError = null;
    } catch (err) {
      this.lastError = String(err);
      throw err;
    }
  }

  /** Blend one layer with the 3D blocking: its root follows the entity's
   * recorded path as seen by the chosen camera. */
  async blendWithBlocking(personId: number, trackId: string, cameraId: string): Promise<void> {
    const pid = this.requireProject();
    const sceneId = this.store.state.sceneId;
    if (!sceneId) throw new Error("no scene selected");
    const resp = await this.api.blendLayer(pid, this.layer(personId), sceneId, trackId, cameraId);
    this.layers = this.layers.map((l) => (l.person_id === personId ? resp.layer : l));
  }

  async recomposite(name: string, fps: number, duration: number): Promise<void> {
    const pid = this.requireProject();
    await this.store.mutate(
      (v) => this.api.recomposite(pid, v, name, this.layers, fps, duration));
    await this.store.refresh();
  }

  private requireProject(): string {
    const pid = this.store.state.projectId;
    if (!pid) throw new Error("no project open");
    return pid;
  }
}
