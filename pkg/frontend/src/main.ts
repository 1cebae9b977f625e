/** Browser bootstrap: wires the panels to the DOM. All state of record
 * lives server-side; this file only routes events and paints. */
import { ApiClient } from "./api.js";
import { MaskPainter } from "./maskPainter.js";
import { ImageStylePanel } from "./panels/imageStyle.js";
import { VideoPlayground } from "./panels/playground.js";
import { TimelinePanel } from "./panels/timelinePanel.js";
import { Store } from "./state.js";
import { Transport } from "./transport.js";
import { MotionCapture, wireframe } from "./viewport.js";
import { RESEMBLANCE_ORDER } from "./types.js";

const BASE_URL = (window as unknown as { PREVIZ_API?: string }).PREVIZ_API ?? "";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot() {
  const transport = new Transport(BASE_URL);
  const api = new ApiClient(transport);
  const store = new Store(api);
  const imageStyle = new ImageStylePanel(api, store);
  const timeline = new TimelinePanel(api, store, BASE_URL);
  const playground = new VideoPlayground(api, store);

  const status = el<HTMLDivElement>("status");
  const report = (err: unknown) => {
    status.textContent = String(err);
    status.classList.add("error");
  };

  const existing = await api.listProjects();
  const pid = existing.projects[0]?.id ?? (await api.createDemoProject()).project_id;
  await store.openProject(pid);

  // viewport -----------------------------------------------------------
  const canvas = el<HTMLCanvasElement>("viewport");
  const ctx = canvas.getContext("2d")!;
  let capture: MotionCapture | null = null;

  function draw() {
    const scene = store.project?.scenes.find((s) => s.id === store.state.sceneId);
    ctx.fillStyle = "#101014";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    if (!scene) return;
    for (const seg of wireframe(scene, store.state.orbit, canvas.width, canvas.height)) {
      ctx.strokeStyle = seg.entityId === store.state.selectedEntity ? "#ffcf5f" : "#5f9fcf";
      ctx.beginPath();
      ctx.moveTo(seg.x0, seg.y0);
      ctx.lineTo(seg.x1, seg.y1);
      ctx.stroke();
    }
  }
  store.subscribe(draw);

  canvas.addEventListener("pointermove", (ev) => {
    if (ev.buttons & 1) {
      store.state.orbit.azimuth += ev.movementX * 0.01;
      store.state.orbit.elevation = Math.min(1.4, Math.max(-1.4,
        store.state.orbit.elevation + ev.movementY * 0.01));
      draw();
    }
  });
  canvas.addEventListener("wheel", (ev) => {
    store.state.orbit.distance = Math.min(40, Math.max(1,
      store.state.orbit.distance * (ev.deltaY > 0 ? 1.1 : 0.9)));
    draw();
  });

  window.addEventListener("keydown", (ev) => capture?.handle(ev.key, true, performance.now()));
  window.addEventListener("keyup", (ev) => capture?.handle(ev.key, false, performance.now()));

  el<HTMLButtonElement>("record").addEventListener("click", async () => {
    const btn = el<HTMLButtonElement>("record");
    if (!capture) {
      capture = new MotionCapture(performance.now());
      btn.textContent = "stop recording";
      return;
    }
    const events = capture.finish(performance.now());
    capture = null;
    btn.textContent = "record motion";
    const track = timeline.tracks().find((t) => t.kind === "element-animation");
    if (!track) return report("no element-animation track to record into");
    try {
      await timeline.commitRecording({ startedAt: 0, events }, track.id, 1.3);
    } catch (err) {
      report(err);
    }
  });

  // image style panel ----------------------------------------------------
  const slider = el<HTMLInputElement>("comparison");
  slider.addEventListener("input", () => {
    store.setComparisonSlider(Number(slider.value) / 100);
    paintComparison();
  });

  const resemblance = el<HTMLInputElement>("resemblance");
  resemblance.addEventListener("change", async () => {
    const level = RESEMBLANCE_ORDER[Number(resemblance.value)];
    const params = await imageStyle.setResemblance(level);
    el<HTMLSpanElement>("resemblance-label").textContent =
      `${level} (skip ${params.skip_steps}, strength ${params.control_strength})`;
  });

  el<HTMLButtonElement>("restyle").addEventListener("click", async () => {
    imageStyle.fields.background_description =
      el<HTMLTextAreaElement>("description").value;
    imageStyle.fields.style = el<HTMLSelectElement>("style").value as never;
    imageStyle.fields.mood_tone = el<HTMLInputElement>("mood").value;
    imageStyle.fields.genre = el<HTMLInputElement>("genre").value;
    try {
      await imageStyle.submitRestyle(currentClipTime());
      await imageStyle.pollUntilDone();
      paintComparison();
    } catch (err) {
      report(err);
    }
  });

  function currentClipTime(): number | undefined {
    const clip = timeline.clips().find((c) => c.id === store.state.clipId);
    return clip ? (clip.t_in + clip.t_out) / 2 : undefined;
  }

  function paintComparison() {
    const view = imageStyle.comparison();
    const img = el<HTMLImageElement>("compare-under");
    const over = el<HTMLImageElement>("compare-over");
    if (view.source) img.src = transport.assetUrl(view.source.hash);
    if (view.output) over.src = transport.assetUrl(view.output.hash);
    over.style.opacity = String(view.outputOpacity);
  }

  // generate -------------------------------------------------------------
  el<HTMLButtonElement>("generate").addEventListener("click", async () => {
    const clipId = store.state.clipId;
    if (!clipId) return report("no clip selected");
    const mode = el<HTMLSelectElement>("mode").value as "resemble" | "creative";
    try {
      await timeline.generateClip(clipId, mode, imageStyle.fields, imageStyle.seed);
      const bar = el<HTMLProgressElement>("job-progress");
      store.subscribe(() => { bar.value = timeline.progress[clipId] ?? 0; });
      await timeline.followProgress(clipId);
    } catch (err) {
      report(err);
    }
  });

  // playground -----------------------------------------------------------
  el<HTMLInputElement>("skeleton-file").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      const entry = await playground.importDocument(
        file.name.replace(/\.skel$/, ""), await file.text());
      el<HTMLDivElement>("library").textContent =
        `${entry.name}: ${entry.frames} frames, ${entry.persons.length} persons`;
    } catch (err) {
      report(err);
    }
  });

  el<HTMLButtonElement>("drop-to-timeline").addEventListener("click", async () => {
    const name = playground.library[playground.library.length - 1]?.name;
    if (!name) return report("import a skeleton first");
    try {
      await playground.dragToTimeline(name, 0);
      draw();
    } catch (err) {
      report(err);
    }
  });

  // mask painter -----------------------------------------------------------
  const maskCanvas = el<HTMLCanvasElement>("mask");
  const painter = new MaskPainter(api, 320, 180);
  maskCanvas.addEventListener("pointerdown", (ev) =>
    painter.pointerDown(ev.offsetX / maskCanvas.width, ev.offsetY / maskCanvas.height));
  maskCanvas.addEventListener("pointermove", (ev) => {
    if (ev.buttons & 1) {
      painter.pointerMove(ev.offsetX / maskCanvas.width, ev.offsetY / maskCanvas.height);
      const mctx = maskCanvas.getContext("2d")!;
      mctx.strokeStyle = "rgba(255,255,255,0.8)";
      mctx.lineWidth = painter.brushRadius;
      mctx.lineCap = "round";
      mctx.beginPath();
      mctx.moveTo(ev.offsetX - ev.movementX, ev.offsetY - ev.movementY);
      mctx.lineTo(ev.offsetX, ev.offsetY);
      mctx.stroke();
    }
  });
  maskCanvas.addEventListener("pointerup", () => painter.pointerUp());
  el<HTMLButtonElement>("mask-commit").addEventListener("click", async () => {
    try {
      const ref = await painter.commit();
      status.textContent = `mask stored: ${ref.hash.slice(0, 12)}`;
    } catch (err) {
      report(err);
    }
  });

  draw();
  status.textContent = `project ${pid} loaded`;
}

boot().catch((err) => {
  document.body.textContent = `previz-ui failed to start: ${err}`;
});
