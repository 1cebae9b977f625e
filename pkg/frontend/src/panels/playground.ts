/** Video Playground: the library of imported skeleton motion. Users
 * import a processed keypoint document, crop it, and drag it onto the
 * timeline, which creates a video track server-side and opens a remix
 * session for it. */
import { ApiClient } from "../api.js";
import { Store } from "../state.js";
import { RemixEditor } from "./remix.js";

export interface LibraryEntry {
  name: string;
  frames: number;
  persons: number[];
  warnings: number;
}

export class VideoPlayground {
  library: LibraryEntry[] = [];
  lastError: string | null = null;

  constructor(readonly api: ApiClient, readonly store: Store) {}

  async importDocument(name: string, document: string): Promise<LibraryEntry> {
    const pid = this.requireProject();
    try {
      const resp = await this.store.mutate(
        (v) => this.api.importSkeleton(pid, v, name, document));
      const entry = {
        name,
        frames: resp.frames,
        persons: resp.persons,
        warnings: resp.clamp_warnings,
      };
      this.library = this.library.filter((e) => e.name !== name).concat(entry);
      this.lastError = null;
      return entry;
    } catch (err) {
      this.lastError = String(err);
      throw err;
    }
  }

  async crop(name: string, t0: number, t1: number, newName: string): Promise<void> {
    const pid = this.requireProject();
    await this.store.mutate((v) => this.api.cropSkeleton(pid, v, name, t0, t1, newName));
    await this.store.refresh();
  }

  /** Dropping a processed skeleton onto the timeline: creates the video
   * track and hands back a remix editor over that sequence's layers. */
  async dragToTimeline(name: string, t0: number): Promise<RemixEditor> {
    const pid = this.requireProject();
    const sceneId = this.store.state.sceneId;
    if (!sceneId) throw new Error("no scene selected");
    await this.store.mutate((v) => this.api.addVideoTrack(pid, v, sceneId, name, t0));
    await this.store.refresh();
    const editor = new RemixEditor(this.api, this.store, name);
    await editor.open();
    return editor;
  }

  private requireProject(): string {
    const pid = this.store.state.projectId;
    if (!pid) throw new Error("no project open");
    return pid;
  }
}
