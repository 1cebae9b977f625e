import { describe, expect, it } from "vitest";

import { MaskPainter } from "../src/maskPainter.js";
import { parseSseChunk } from "../src/sse.js";
import { MotionCapture, orbitEye, projectPoint, wireframe } from "../src/viewport.js";
import type { SceneDoc } from "../src/types.js";

describe("sse parser", () => {
  it("splits complete events and keeps the remainder", () => {
    const { events, rest } = parseSseChunk(
      'data: {"a":1}\n\ndata: {"a":2}\n\ndata: {"a"');
    expect(events).toEqual(['{"a":1}', '{"a":2}']);
    expect(rest).toBe('data: {"a"');
  });

  it("ignores non-data lines", () => {
    const { events } = parseSseChunk(": comment\nretry: 99\ndata: x\n\n");
    expect(events).toEqual(["x"]);
  });
});

describe("mask painter", () => {
  const api = null as never; // commit() untested here; geometry only
  it("covers painted segments and respects erase", () => {
    const painter = new MaskPainter(api, 100, 100, 6);
    painter.pointerDown(0.1, 0.5);
    painter.pointerMove(0.9, 0.5);
    painter.pointerUp();
    expect(painter.covers(0.5, 0.5)).toBe(true);
    expect(painter.covers(0.5, 0.8)).toBe(false);
    painter.erasing = true;
    painter.pointerDown(0.5, 0.5);
    painter.pointerUp();
    expect(painter.covers(0.5, 0.5)).toBe(false);
  });

  it("clamps strokes to the unit square", () => {
    const painter = new MaskPainter(api, 100, 100, 4);
    painter.pointerDown(-0.5, 2.0);
    expect(painter.strokes[0].x0).toBe(0);
    expect(painter.strokes[0].y0).toBe(1);
  });
});

describe("motion capture", () => {
  it("records timed press/release pairs and drops key repeat", () => {
    const cap = new MotionCapture(1000);
    expect(cap.handle("w", true, 1000)).toBe(true);
    expect(cap.handle("w", true, 1100)).toBe(false); // auto-repeat
    expect(cap.handle("W", false, 3000)).toBe(true);
    expect(cap.events).toEqual([
      { t: 0, key: "w", pressed: true },
      { t: 2, key: "w", pressed: false },
    ]);
  });

  it("finish releases held keys", () => {
    const cap = new MotionCapture(0);
    cap.handle("w", true, 0);
    cap.handle("d", true, 500);
    const events = cap.finish(2000);
    const releases = events.filter((e) => !e.pressed).map((e) => e.key).sort();
    expect(releases).toEqual(["d", "w"]);
    expect(events[events.length - 1].t).toBe(2);
  });

  it("ignores non-recording keys", () => {
    const cap = new MotionCapture(0);
    expect(cap.handle("x", true, 0)).toBe(false);
    expect(cap.events).toHaveLength(0);
  });
});

describe("viewport projection", () => {
  const orbit = { azimuth: 0, elevation: 0, distance: 5, target: [0, 0, 0] as [number, number, number] };

  it("puts the orbit target at the canvas center", () => {
    const p = projectPoint(orbit, [0, 0, 0], 800, 600);
    expect(p).not.toBeNull();
    expect(p![0]).toBeCloseTo(400, 5);
    expect(p![1]).toBeCloseTo(300, 5);
  });

  it("returns null behind the eye", () => {
    expect(projectPoint(orbit, orbitEye(orbit), 800, 600)).toBeNull();
    expect(projectPoint(orbit, [0, 0, 99], 800, 600)).toBeNull();
  });

  it("emits wireframe segments for visible boxes", () => {
    const scene: SceneDoc = {
      id: "s",
      entities: [{
        id: "crate", name: "crate", role: "prop", movable: false,
        base_color: [1, 0, 0],
        transform: { translation: [0, 0, 0], rotation: [1, 0, 0, 0], scale: [1, 1, 1] },
        geometry: { kind: "box" },
      }],
      cameras: [], lights: [], backdrop_color: [0, 0, 0],
    };
    const segs = wireframe(scene, orbit, 800, 600);
    expect(segs).toHaveLength(12);
    expect(segs.every((s) => s.entityId === "crate")).toBe(true);
  });
});
