import type { Snapshot } from "./protocol.js";

// Two orthographic projections of the snapshot: top-down (world x/y) and
// side (world x/z).  Pure draw code against a small canvas-2d subset so
// tests can record the calls without a DOM.

export interface Ctx2D {
  canvas?: unknown;
  strokeStyle: unknown;
  fillStyle: unknown;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(rad: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  setLineDash(segments: number[]): void;
}

export interface Viewport {
  w: number; // canvas px
  h: number;
  scale: number; // px per metre
  cx: number; // world point at the canvas centre (top view)
  cy: number;
}

export function worldToPx(vp: Viewport, x: number, y: number): [number, number] {
  return [vp.w / 2 + (x - vp.cx) * vp.scale, vp.h / 2 - (y - vp.cy) * vp.scale];
}

// side view: x right, z up, ground fixed near the bottom edge
export function sideToPx(vp: Viewport, x: number, z: number): [number, number] {
  return [vp.w / 2 + (x - vp.cx) * vp.scale, vp.h - 24 - z * vp.scale];
}

function num(v: unknown, fallback = 0): number {
  return typeof v === "number" ? v : fallback;
}

function vec(v: unknown): number[] {
  return Array.isArray(v) ? v.map((e) => num(e)) : [0, 0, 0];
}

function cross(ctx: Ctx2D, px: number, py: number, r: number): void {
  ctx.beginPath();
  ctx.moveTo(px - r, py);
  ctx.lineTo(px + r, py);
  ctx.moveTo(px, py - r);
  ctx.lineTo(px, py + r);
  ctx.stroke();
}

function dot(ctx: Ctx2D, px: number, py: number, r: number): void {
  ctx.beginPath();
  ctx.arc(px, py, r, 0, Math.PI * 2);
  ctx.fill();
}

const BASE_LEN = 0.7; // footprint metres, drawing only
const BASE_WID = 0.45;
const BASE_TOP_Z = 0.55;

function grid(ctx: Ctx2D, vp: Viewport, toPx: (x: number, y: number) => [number, number]): void {
  ctx.strokeStyle = "#2a2f36";
  ctx.lineWidth = 1;
  const span = Math.max(vp.w, vp.h) / vp.scale;
  const step = span > 12 ? 2 : 1;
  const x0 = Math.floor(vp.cx - span) * 1;
  for (let gx = x0; gx <= vp.cx + span; gx += step) {
    const [px] = toPx(gx, 0);
    ctx.beginPath();
    ctx.moveTo(px, 0);
    ctx.lineTo(px, vp.h);
    ctx.stroke();
  }
}

export function renderTop(ctx: Ctx2D, vp: Viewport, snap: Snapshot): void {
  ctx.clearRect(0, 0, vp.w, vp.h);
  grid(ctx, vp, (x, y) => worldToPx(vp, x, y));
  ctx.font = "10px monospace";

  for (const [name, fx] of Object.entries(snap.fixtures)) {
    const kind = String(fx["kind"] ?? "");
    ctx.strokeStyle = "#8a93a0";
    ctx.fillStyle = "#8a93a0";
    ctx.lineWidth = 1.5;
    ctx.setLineDash([]);
    if (kind === "region") {
      const c = vec(fx["center"]);
      const he = vec(fx["half_extents"]);
      const [px, py] = worldToPx(vp, c[0]! - he[0]!, c[1]! + he[1]!);
      ctx.setLineDash([4, 3]);
      ctx.beginPath();
      ctx.rect(px, py, 2 * he[0]! * vp.scale, 2 * he[1]! * vp.scale);
      ctx.stroke();
      ctx.setLineDash([]);
      ctx.fillText(name, px + 2, py + 10);
    } else if (kind === "rail") {
      const c = vec(fx["center"]);
      const d = vec(fx["dir"]);
      const half = num(fx["length"], 1) / 2;
      const [ax, ay] = worldToPx(vp, c[0]! - d[0]! * half, c[1]! - d[1]! * half);
      const [bx, by] = worldToPx(vp, c[0]! + d[0]! * half, c[1]! + d[1]! * half);
      ctx.beginPath();
      ctx.moveTo(ax, ay);
      ctx.lineTo(bx, by);
      ctx.stroke();
      ctx.fillText(name, bx + 3, by);
    } else if (kind === "cup") {
      const p = vec(fx["position"]);
      const [px, py] = worldToPx(vp, p[0]!, p[1]!);
      ctx.beginPath();
      ctx.arc(px, py, Math.max(2, num(fx["radius"], 0.04) * vp.scale), 0, Math.PI * 2);
      ctx.stroke();
      ctx.fillText(name, px + 5, py - 5);
    } else if (kind === "mailbox" || kind === "dishwasher") {
      const p = vec(fx["position"]);
      const [px, py] = worldToPx(vp, p[0]!, p[1]!);
      ctx.beginPath();
      ctx.rect(px - 0.25 * vp.scale, py - 0.25 * vp.scale, 0.5 * vp.scale, 0.5 * vp.scale);
      ctx.stroke();
      const handle = vec(fx[kind === "mailbox" ? "handle" : "rack_handle"]);
      const [hx, hy] = worldToPx(vp, handle[0]!, handle[1]!);
      dot(ctx, hx, hy, 2.5);
      ctx.fillText(`${name} ${num(fx["angle_deg"]).toFixed(0)}°`, px + 5, py - 8);
    } else {
      const p = vec(fx["position"]);
      const [px, py] = worldToPx(vp, p[0]!, p[1]!);
      dot(ctx, px, py, 2.5);
      ctx.fillText(name, px + 5, py - 5);
    }
  }

  ctx.fillStyle = "#d9b44a";
  for (const [name, pos] of Object.entries(snap.objects)) {
    const p = vec(pos);
    const [px, py] = worldToPx(vp, p[0]!, p[1]!);
    dot(ctx, px, py, 3);
    ctx.fillText(name, px + 5, py + 9);
  }

  if (snap.head) {
    const [px, py] = worldToPx(vp, snap.head[0]!, snap.head[1]!);
    ctx.strokeStyle = "#e06c75";
    ctx.beginPath();
    ctx.arc(px, py, 0.09 * vp.scale, 0, Math.PI * 2);
    ctx.stroke();
    ctx.fillStyle = "#e06c75";
    ctx.fillText("head", px + 6, py);
  }

  // base footprint, oriented
  const b = snap.base;
  const [bx, by] = worldToPx(vp, b.x, b.y);
  ctx.save();
  ctx.translate(bx, by);
  ctx.rotate(-b.yaw); // canvas y is flipped
  ctx.strokeStyle = "#61afef";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.rect(
    (-BASE_LEN / 2) * vp.scale,
    (-BASE_WID / 2) * vp.scale,
    BASE_LEN * vp.scale,
    BASE_WID * vp.scale,
  );
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(0, 0);
  ctx.lineTo((BASE_LEN / 2) * vp.scale, 0);
  ctx.stroke();
  ctx.restore();

  // end effector + a reach line from the base
  const ee = vec(snap.ee.position);
  const [ex, ey] = worldToPx(vp, ee[0]!, ee[1]!);
  ctx.strokeStyle = "#98c379";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(bx, by);
  ctx.lineTo(ex, ey);
  ctx.stroke();
  ctx.lineWidth = 2;
  cross(ctx, ex, ey, 5);
}

export function renderSide(ctx: Ctx2D, vp: Viewport, snap: Snapshot): void {
  ctx.clearRect(0, 0, vp.w, vp.h);
  ctx.font = "10px monospace";

  // ground
  ctx.strokeStyle = "#2a2f36";
  ctx.lineWidth = 1;
  const [, gy] = sideToPx(vp, 0, 0);
  ctx.beginPath();
  ctx.moveTo(0, gy);
  ctx.lineTo(vp.w, gy);
  ctx.stroke();

  ctx.strokeStyle = "#8a93a0";
  ctx.fillStyle = "#8a93a0";
  for (const [name, fx] of Object.entries(snap.fixtures)) {
    const kind = String(fx["kind"] ?? "");
    if (kind === "region") continue; // floor area, no height to show
    if (kind === "rail") {
      const c = vec(fx["center"]);
      const d = vec(fx["dir"]);
      const half = num(fx["length"], 1) / 2;
      const [ax, ay] = sideToPx(vp, c[0]! - d[0]! * half, c[2]! - d[2]! * half);
      const [bx2, by2] = sideToPx(vp, c[0]! + d[0]! * half, c[2]! + d[2]! * half);
      ctx.beginPath();
      ctx.moveTo(ax, ay);
      ctx.lineTo(bx2, by2);
      ctx.stroke();
      ctx.fillText(name, bx2 + 3, by2);
      continue;
    }
    const p = vec(fx["position"] ?? fx["center"]);
    const [px, py] = sideToPx(vp, p[0]!, p[2]!);
    dot(ctx, px, py, 2.5);
    ctx.fillText(name, px + 5, py - 4);
  }

  ctx.fillStyle = "#d9b44a";
  for (const [name, pos] of Object.entries(snap.objects)) {
    const p = vec(pos);
    const [px, py] = sideToPx(vp, p[0]!, p[2]!);
    dot(ctx, px, py, 3);
    ctx.fillText(name, px + 5, py + 9);
  }

  if (snap.head) {
    const [px, py] = sideToPx(vp, snap.head[0]!, snap.head[2]!);
    ctx.strokeStyle = "#e06c75";
    ctx.beginPath();
    ctx.arc(px, py, 0.09 * vp.scale, 0, Math.PI * 2);
    ctx.stroke();
  }

  // base box
  const b = snap.base;
  const [b0x, b0y] = sideToPx(vp, b.x - BASE_LEN / 2, 0);
  const [b1x, b1y] = sideToPx(vp, b.x + BASE_LEN / 2, BASE_TOP_Z);
  ctx.strokeStyle = "#61afef";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.rect(b0x, b1y, b1x - b0x, b0y - b1y);
  ctx.stroke();

  const ee = vec(snap.ee.position);
  const [ex, ey] = sideToPx(vp, ee[0]!, ee[2]!);
  ctx.strokeStyle = "#98c379";
  cross(ctx, ex, ey, 5);
  ctx.fillStyle = "#98c379";
  ctx.fillText(`z=${ee[2]!.toFixed(2)}`, ex + 7, ey - 7);
}
