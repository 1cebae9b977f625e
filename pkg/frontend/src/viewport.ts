/** 3D viewport model: orbit navigation, a client-side wireframe projection
 * for interactive feedback, and WASD + Q/E capture that streams timed
 * input events to the motion recorder. Captured conditioning frames always
 * come from the server renderer; this projection only drives gizmos and
 * wireframes, so it does not need to match the server bit-for-bit. */
import type { OrbitCamera } from "./state.js";
import type { EntityDoc, SceneDoc } from "./types.js";

export interface Segment {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  entityId: string;
}

const RECORD_KEYS = new Set(["w", "a", "s", "d", "q", "e"]);

export function orbitEye(orbit: OrbitCamera): [number, number, number] {
  const [tx, ty, tz] = orbit.target;
  const ce = Math.cos(orbit.elevation);
  return [
    tx + orbit.distance * ce * Math.sin(orbit.azimuth),
    ty + orbit.distance * Math.sin(orbit.elevation),
    tz + orbit.distance * ce * Math.cos(orbit.azimuth),
  ];
}

function viewBasis(orbit: OrbitCamera) {
  const eye = orbitEye(orbit);
  const [tx, ty, tz] = orbit.target;
  let fx = tx - eye[0];
  let fy = ty - eye[1];
  let fz = tz - eye[2];
  const fl = Math.hypot(fx, fy, fz);
  fx /= fl; fy /= fl; fz /= fl;
  // right = forward x worldUp(0,1,0)
  let rx = -fz;
  let ry = 0;
  let rz = fx;
  const rl = Math.hypot(rx, ry, rz) || 1;
  rx /= rl; ry /= rl; rz /= rl;
  // up = right x forward
  const ux = ry * fz - rz * fy;
  const uy = rz * fx - rx * fz;
  const uz = rx * fy - ry * fx;
  return { eye, f: [fx, fy, fz], r: [rx, ry, rz], u: [ux, uy, uz] };
}

/** Project one world point; returns null behind the eye. */
export function projectPoint(orbit: OrbitCamera, p: [number, number, number],
                             width: number, height: number, fovDeg = 55): [number, number] | null {
  const { eye, f, r, u } = viewBasis(orbit);
  const dx = p[0] - eye[0];
  const dy = p[1] - eye[1];
  const dz = p[2] - eye[2];
  const zc = dx * f[0] + dy * f[1] + dz * f[2];
  if (zc <= 0.01) return null;
  const xc = dx * r[0] + dy * r[1] + dz * r[2];
  const yc = dx * u[0] + dy * u[1] + dz * u[2];
  const t = Math.tan((fovDeg * Math.PI) / 360);
  const ndcX = xc / (zc * t);
  const ndcY = yc / (zc * t * (height / width));
  return [(ndcX + 1) * 0.5 * width, (1 - ndcY) * 0.5 * height];
}

function entityCorners(e: EntityDoc): [number, number, number][] {
  const [sx, sy, sz] = e.transform.scale;
  const [tx, ty, tz] = e.transform.translation;
  const pts: [number, number, number][] = [];
  for (const ix of [-0.5, 0.5]) {
    for (const iy of [-0.5, 0.5]) {
      for (const iz of [-0.5, 0.5]) {
        pts.push([tx + ix * sx, ty + iy * sy, tz + iz * sz]);
      }
    }
  }
  return pts;
}

const BOX_EDGES: [number, number][] = [
  [0, 1], [0, 2], [0, 4], [1, 3], [1, 5], [2, 3],
  [2, 6], [3, 7], [4, 5], [4, 6], [5, 7], [6, 7],
];

/** Wireframe segments for the whole scene under the orbit camera.
 * Rotation is ignored for gizmo boxes: axis-aligned proxies are enough
 * feedback for blocking, and selection highlighting uses entity ids. */
export function wireframe(scene: SceneDoc, orbit: OrbitCamera,
                          width: number, height: number): Segment[] {
  const out: Segment[] = [];
  for (const entity of scene.entities) {
    const corners = entityCorners(entity).map((p) =>
      projectPoint(orbit, p, width, height));
    for (const [a, b] of BOX_EDGES) {
      const pa = corners[a];
      const pb = corners[b];
      if (pa && pb) {
        out.push({ x0: pa[0], y0: pa[1], x1: pb[0], y1: pb[1], entityId: entity.id });
      }
    }
  }
  return out;
}

/** Keyboard capture for motion recording: keydown/keyup during a recording
 * session become timed events for the server-side path integrator. */
export class MotionCapture {
  readonly events: { t: number; key: string; pressed: boolean }[] = [];
  private down = new Set<string>();

  constructor(readonly startedAt: number) {}

  handle(key: string, pressed: boolean, now: number): boolean {
    const k = key.toLowerCase();
    if (!RECORD_KEYS.has(k)) return false;
    if (pressed && this.down.has(k)) return false; // key-repeat noise
    if (!pressed && !this.down.has(k)) return false;
    if (pressed) this.down.add(k);
    else this.down.delete(k);
    this.events.push({ t: (now - this.startedAt) / 1000, key: k, pressed });
    return true;
  }

  /** Release anything still held so the recording is self-contained. */
  finish(now: number): { t: number; key: string; pressed: boolean }[] {
    for (const k of [...this.down].sort()) {
      this.events.push({ t: (now - this.startedAt) / 1000, key: k, pressed: false });
    }
    this.down.clear();
    return this.events;
  }
}
