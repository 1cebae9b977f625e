/** Inpainting mask painter: pointer movements become brush strokes, and a
 * commit posts the stroke list for server-side rasterization — the server
 * mask is the one conditioning actually uses, so there is no client/server
 * drift. The local preview only needs stroke geometry. */
import { ApiClient } from "./api.js";
import type { AssetRef, Stroke } from "./types.js";

export class MaskPainter {
  strokes: Stroke[] = [];
  private last: [number, number] | null = null;

  constructor(
    readonly api: ApiClient,
    readonly width: number,
    readonly height: number,
    public brushRadius = 8,
    public erasing = false,
  ) {}

  pointerDown(x: number, y: number): void {
    this.last = [x, y];
    this.strokes.push(this.stroke(x, y, x, y));
  }

  pointerMove(x: number, y: number): void {
    if (!this.last) return;
    this.strokes.push(this.stroke(this.last[0], this.last[1], x, y));
    this.last = [x, y];
  }

  pointerUp(): void {
    this.last = null;
  }

  clear(): void {
    this.strokes = [];
    this.last = null;
  }

  private stroke(x0: number, y0: number, x1: number, y1: number): Stroke {
    const clamp = (v: number) => Math.min(1, Math.max(0, v));
    return {
      x0: clamp(x0),
      y0: clamp(y0),
      x1: clamp(x1),
      y1: clamp(y1),
      radius: this.brushRadius,
      erase: this.erasing || undefined,
    };
  }

  /** Coarse client-side coverage check for preview/tests: does any stroke
   * reach this normalized point? */
  covers(x: number, y: number): boolean {
    const px = x * this.width;
    const py = y * this.height;
    let hit = false;
    for (const s of this.strokes) {
      const d = distToSegment(px, py,
        s.x0 * this.width, s.y0 * this.height,
        s.x1 * this.width, s.y1 * this.height);
      if (d <= s.radius) hit = !s.erase;
    }
    return hit;
  }

  async commit(): Promise<AssetRef> {
    const { ref } = await this.api.paintMask(this.width, this.height, this.strokes);
    return ref;
  }
}

function distToSegment(px: number, py: number, x0: number, y0: number,
                       x1: number, y1: number): number {
  const dx = x1 - x0;
  const dy = y1 - y0;
  const len2 = dx * dx + dy * dy;
  let u = len2 === 0 ? 0 : ((px - x0) * dx + (py - y0) * dy) / len2;
  u = Math.min(1, Math.max(0, u));
  return Math.hypot(px - (x0 + u * dx), py - (y0 + u * dy));
}
