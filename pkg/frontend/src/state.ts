/** ViewState: everything the page needs to draw, reconstructable from the
 * API alone. The client holds no truth of its own — a reload calls
 * reconstruct() and must land in an identical state. */
import { ApiClient } from "./api.js";
import { ApiError } from "./transport.js";
import type { ProjectDoc } from "./types.js";

export type PanelMode = "scene" | "video";

export interface OrbitCamera {
  azimuth: number;
  elevation: number;
  distance: number;
  target: [number, number, number];
}

export interface ViewState {
  projectId: string | null;
  version: number;
  sceneId: string | null;
  clipId: string | null;
  selectedEntity: string | null;
  panelMode: PanelMode;
  comparisonSlider: number; // 0 = pure source, 1 = pure output
  orbit: OrbitCamera;
}

const DEFAULT_ORBIT: OrbitCamera = {
  azimuth: 0.6,
  elevation: 0.35,
  distance: 9,
  target: [0, 1, -3],
};

export class Store {
  state: ViewState = {
    projectId: null,
    version: 0,
    sceneId: null,
    clipId: null,
    selectedEntity: null,
    panelMode: "scene",
    comparisonSlider: 1,
    orbit: { ...DEFAULT_ORBIT },
  };
  project: ProjectDoc | null = null;
  private listeners: (() => void)[] = [];

  constructor(readonly api: ApiClient) {}

  subscribe(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  async openProject(pid: string): Promise<void> {
    const { version, project } = await this.api.getProject(pid);
    this.project = project;
    this.state.projectId = pid;
    this.state.version = version;
    if (!this.state.sceneId || !project.scenes.some((s) => s.id === this.state.sceneId)) {
      this.state.sceneId = project.scenes[0]?.id ?? null;
    }
    const clips = project.timelines.find((t) => t.scene_id === this.state.sceneId)?.clips ?? [];
    if (!this.state.clipId || !clips.some((c) => c.id === this.state.clipId)) {
      this.state.clipId = clips[0]?.id ?? null;
    }
    if (this.state.selectedEntity &&
        !project.scenes.some((s) => s.entities.some((e) => e.id === this.state.selectedEntity))) {
      this.state.selectedEntity = null;
    }
    this.emit();
  }

  /** Re-read the project after any mutation; server version is the truth. */
  async refresh(): Promise<void> {
    if (this.state.projectId) await this.openProject(this.state.projectId);
  }

  /** Optimistic mutation with version-token reconciliation: on a 409 the
   * store re-reads the project and replays the call once against the
   * fresh token. Background activity (job submissions append history)
   * legitimately bumps versions between user edits. */
  async mutate<T extends { version: number }>(
    fn: (baseVersion: number) => Promise<T>,
  ): Promise<T> {
    try {
      const resp = await fn(this.state.version);
      this.state.version = resp.version;
      return resp;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        await this.refresh();
        const resp = await fn(this.state.version);
        this.state.version = resp.version;
        return resp;
      }
      throw err;
    }
  }

  selectScene(sceneId: string): void {
    this.state.sceneId = sceneId;
    this.state.clipId = null;
    this.emit();
  }

  selectClip(clipId: string | null): void {
    this.state.clipId = clipId;
    this.emit();
  }

  selectEntity(entityId: string | null): void {
    this.state.selectedEntity = entityId;
    this.emit();
  }

  setPanelMode(mode: PanelMode): void {
    this.state.panelMode = mode;
    this.emit();
  }

  setComparisonSlider(value: number): void {
    this.state.comparisonSlider = Math.min(1, Math.max(0, value));
    this.emit();
  }

  /** What a fresh page load would compute for the same project/selection.
   * Used by the reload-equivalence test: snapshot() of the live store must
   * deep-equal snapshot() of a freshly reconstructed one. */
  snapshot(): Record<string, unknown> {
    const timeline = this.project?.timelines.find((t) => t.scene_id === this.state.sceneId);
    return {
      projectId: this.state.projectId,
      version: this.state.version,
      sceneId: this.state.sceneId,
      clipId: this.state.clipId,
      panelMode: this.state.panelMode,
      entityIds: this.project?.scenes.flatMap((s) => s.entities.map((e) => e.id)) ?? [],
      clipStatuses: timeline?.clips.map((c) => [c.id, c.status, c.attached_video_result]) ?? [],
      videoTracks: this.project?.video_tracks.map((v) => [v.skeleton_name, v.t0]) ?? [],
      skeletonNames: Object.keys(this.project?.skeletons ?? {}).sort(),
      historyLabels: this.project?.history.map((h) => [h.label, h.superseded]) ?? [],
    };
  }

  static async reconstruct(api: ApiClient, pid: string, sceneId?: string, clipId?: string): Promise<Store> {
    const store = new Store(api);
    await store.openProject(pid);
    if (sceneId) store.state.sceneId = sceneId;
    if (clipId) store.state.clipId = clipId;
    return store;
  }
}
