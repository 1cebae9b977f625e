/** End-to-end against the real service with the stub backend: spawns
 * `previz serve` and drives the panels exactly as the DOM layer would. */
import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ImageStylePanel } from "../src/panels/imageStyle.js";
import { VideoPlayground } from "../src/panels/playground.js";
import { TimelinePanel } from "../src/panels/timelinePanel.js";
import { Store } from "../src/state.js";
import { Transport } from "../src/transport.js";

const PORT = 14700 + (process.pid % 800);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let transport: Transport;
let api: ApiClient;
let store: Store;
let pid: string;

function skeletonDocument(frames = 8, persons = 2): string {
  const lines = ["previz-skel/1", "fps 16.0", `frames ${frames}`, "source_size 1280 720"];
  for (let f = 0; f < frames; f++) {
    lines.push(`frame ${f}`);
    for (let p = 0; p < persons; p++) {
      const rootX = 0.3 + 0.4 * p + 0.01 * f;
      const joints: string[] = [];
      for (let j = 0; j < 18; j++) {
        joints.push(`${(rootX + 0.005 * j).toFixed(4)} ${(0.3 + 0.02 * j).toFixed(4)} 1.0`);
      }
      lines.push(`person ${p} ${joints.join(" ")}`);
    }
  }
  return lines.join("\n") + "\n";
}

async function waitForHealth(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/api/v1/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await new Promise((r) => setTimeout(r, 150));
  }
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "previz.cli", "serve", "--port", String(PORT)], {
    stdio: ["ignore", "pipe", "pipe"],
    env: { ...process.env, PREVIZ_GEN_BACKEND: "stub" },
  });
  server.stderr?.on("data", (chunk: Buffer) => {
    const text = chunk.toString();
    if (text.includes("Traceback")) console.error(text);
  });
  await waitForHealth();
  transport = new Transport(BASE);
  api = new ApiClient(transport);
  store = new Store(api);
  pid = (await api.createDemoProject()).project_id;
  await store.openProject(pid);
}, 40_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("resemblance control", () => {
  it("dragging to Faithful emits skip=1, strength=0.7 on the wire", async () => {
    const panel = new ImageStylePanel(api, store);
    panel.fields.background_description = "a dim hideout lit by a single monitor";
    panel.size = [96, 54];

    // drag position 1/3 of the way = second stop = faithful
    const params = await panel.setResemblance(1 / 3);
    expect(panel.level).toBe("faithful");
    expect(params).toMatchObject({
      total_steps: 20, skip_steps: 1, control_strength: 0.7, use_latent_blend: true,
    });

    await panel.submitRestyle(1.0);
    const wire = transport.sent("/jobs/restyle")[0];
    expect(wire.method).toBe("POST");
    const sentParams = (wire.body as { params: unknown }).params;
    expect(sentParams).toMatchObject({
      total_steps: 20, skip_steps: 1, control_strength: 0.7, use_latent_blend: true,
    });
    await panel.pollUntilDone();
    expect(panel.outputRef).not.toBeNull();
  }, 30_000);

  it("all four stops carry the exact parameter table", async () => {
    const expectTable: Record<string, [number, number, boolean]> = {
      strict: [5, 0.7, true],
      faithful: [1, 0.7, true],
      flexible: [0, 0.7, true],
      loose: [0, 0.3, false],
    };
    const panel = new ImageStylePanel(api, store);
    for (const [level, [skip, strength, blend]] of Object.entries(expectTable)) {
      const params = await panel.setResemblance(level as never);
      expect([params.skip_steps, params.control_strength, params.use_latent_blend])
        .toEqual([skip, strength, blend]);
    }
  });
});

describe("comparison slider", () => {
  it("shows pure source at 0 and pure output at 1", async () => {
    const panel = new ImageStylePanel(api, store);
    panel.fields.background_description = "a dim hideout";
    panel.size = [96, 54];
    await panel.setResemblance("loose");
    await panel.submitRestyle(1.0);
    await panel.pollUntilDone();

    store.setComparisonSlider(0);
    const atZero = panel.displayedAsset();
    store.setComparisonSlider(1);
    const atOne = panel.displayedAsset();
    expect(atZero!.hash).toBe(panel.sourceRef!.hash);
    expect(atOne!.hash).toBe(panel.outputRef!.hash);
    expect(atZero!.hash).not.toBe(atOne!.hash);

    // both endpoints resolve to real, distinct images
    const src = await fetch(transport.assetUrl(atZero!.hash));
    const out = await fetch(transport.assetUrl(atOne!.hash));
    expect(src.status).toBe(200);
    expect(out.status).toBe(200);
    const a = new Uint8Array(await src.arrayBuffer());
    const b = new Uint8Array(await out.arrayBuffer());
    expect(a.slice(0, 8)).toEqual(b.slice(0, 8)); // both PNG
    expect(Buffer.from(a).equals(Buffer.from(b))).toBe(false);

    // opacity mapping: 0 -> source visible, 1 -> output on top
    store.setComparisonSlider(0);
    expect(panel.comparison().outputOpacity).toBe(0);
    store.setComparisonSlider(1);
    expect(panel.comparison().outputOpacity).toBe(1);
  }, 30_000);
});

describe("video playground", () => {
  it("dragging a processed skeleton onto the timeline creates a video track", async () => {
    const playground = new VideoPlayground(api, store);
    const entry = await playground.importDocument("ref-footage", skeletonDocument());
    expect(entry.frames).toBe(8);
    expect(entry.persons).toEqual([0, 1]);

    const before = (await api.videoTracks(pid)).video_tracks.length;
    const editor = await playground.dragToTimeline("ref-footage", 0.25);
    const after = (await api.videoTracks(pid)).video_tracks;
    expect(after.length).toBe(before + 1);
    expect(after[after.length - 1]).toMatchObject({ skeleton_name: "ref-footage", t0: 0.25 });

    // the drop opened a remix session over the per-person layers
    expect(editor.layers).toHaveLength(2);

    // remix: shrink person 1, recomposite into a new guidance sequence
    await editor.transform(1, [0.1, -0.05], 0.6);
    await editor.recomposite("ref-remixed", 16, 0.5);
    expect(Object.keys(store.project!.skeletons)).toContain("ref-remixed");
  }, 30_000);

  it("blend re-anchors a layer onto the conspirator's recorded path", async () => {
    const playground = new VideoPlayground(api, store);
    await playground.importDocument("blend-src", skeletonDocument(16, 1));
    const editor = await playground.dragToTimeline("blend-src", 0);
    const before = JSON.stringify(editor.layer(0).frames);
    await editor.blendWithBlocking(0, "conspirator-walk", "cam-ots");
    // frames where the entity is on screen move; off-screen frames persist
    expect(JSON.stringify(editor.layer(0).frames)).not.toBe(before);
  }, 30_000);
});

describe("clip generation", () => {
  it("streams monotone progress and attaches the result", async () => {
    const timeline = new TimelinePanel(api, store, BASE);
    const clip = timeline.clips().find((c) => c.id === "c1");
    expect(clip).toBeDefined();
    await timeline.generateClip("c1", "resemble", {
      style: "Cinematic",
      mood_tone: "tense",
      genre: "thriller",
      background_description: "a dim hideout lit by a single monitor",
      motion_prompt: "a man walks toward a woman at a desk",
    }, 7, [64, 36]);

    await timeline.followProgress("c1");
    expect(timeline.progress["c1"]).toBe(1);

    const updated = timeline.clips().find((c) => c.id === "c1")!;
    expect(updated.status).toBe("generated");
    expect(updated.attached_video_result).toBeTruthy();
    const gif = await fetch(transport.assetUrl(updated.attached_video_result!));
    expect(gif.status).toBe(200);
    const bytes = Buffer.from(await gif.arrayBuffer());
    expect(bytes.subarray(0, 3).toString()).toBe("GIF");
  }, 60_000);
});

describe("viewport motion recording", () => {
  it("WASD capture streams timed events into a recorded path", async () => {
    const { MotionCapture } = await import("../src/viewport.js");
    const timeline = new TimelinePanel(api, store, BASE);
    const track = timeline.tracks().find((t) => t.kind === "element-animation");
    expect(track).toBeDefined();
    const pathsBefore = track!.motion_paths.length;

    const capture = new MotionCapture(0);
    capture.handle("w", true, 0);
    capture.handle("d", true, 400);
    capture.handle("d", false, 900);
    const events = capture.finish(1500); // releases the held W
    await timeline.commitRecording(
      { startedAt: 0, events }, track!.id, 1.3, [2.6, 0, -3.0]);

    const after = timeline.tracks().find((t) => t.id === track!.id)!;
    expect(after.motion_paths.length).toBe(pathsBefore + 1);
    const recorded = after.motion_paths[after.motion_paths.length - 1];
    expect(recorded.source).toBe("recorded");
    expect(recorded.samples.length).toBeGreaterThanOrEqual(2);
    // 1.5 s at 1.3 m/s heading -Z then diagonally: ends up forward-left
    const last = recorded.samples[recorded.samples.length - 1];
    expect(last[1][2]).toBeLessThan(-3.0);
  }, 30_000);
});

describe("reload reconstructs identical state", () => {
  it("a fresh store over the same API lands in the same snapshot", async () => {
    await store.refresh();
    const live = store.snapshot();
    const reloaded = await Store.reconstruct(
      api, pid, store.state.sceneId ?? undefined, store.state.clipId ?? undefined);
    expect(reloaded.snapshot()).toEqual(live);
  });

  it("errors are surfaced, not swallowed", async () => {
    const panel = new ImageStylePanel(api, store);
    panel.fields.background_description = ""; // invalid: description required
    await panel.setResemblance("strict");
    await expect(panel.submitRestyle(1.0)).rejects.toThrow();
    expect(panel.lastError).toBeTruthy();
  });

  it("stale version writes surface a 409 for reconciliation", async () => {
    const staleStore = new Store(api);
    await staleStore.openProject(pid);
    staleStore.state.version = 1; // long-stale token
    await expect(
      api.appearance(pid, "hideout", staleStore.state.version, "desk", [0.5, 0.2, 0.2]),
    ).rejects.toMatchObject({ status: 409 });
  });
});
