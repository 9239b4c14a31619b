// Canvas rendering and hit testing. The drawing context is typed
// structurally (Ctx2D) so tests can pass a recording stub instead of a
// real canvas.

import { badgeText, realEntries, SceneState } from "./model.js";
import { ApolloniusResponse, InputCircle } from "./types.js";

export interface Viewport {
  scale: number; // pixels per world unit
  ox: number; // pixel x of world origin
  oy: number; // pixel y of world origin (world y points up)
}

export interface Ctx2D {
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

export function worldToPixel(vp: Viewport, x: number, y: number): [number, number] {
  return [vp.ox + vp.scale * x, vp.oy - vp.scale * y];
}

export function pixelToWorld(vp: Viewport, px: number, py: number): [number, number] {
  return [(px - vp.ox) / vp.scale, (vp.oy - py) / vp.scale];
}

function strokeCircle(ctx: Ctx2D, vp: Viewport, cx: number, cy: number, r: number): void {
  const [px, py] = worldToPixel(vp, cx, cy);
  ctx.beginPath();
  ctx.arc(px, py, r * vp.scale, 0, 2 * Math.PI);
  ctx.stroke();
}

/** Draw the real tangent circles of a response; complex solutions are
 *  never drawn. Radii are |Re r| — a sign-flipped radius is the same
 *  circle. Returns how many were drawn. */
export function drawTangents(
  ctx: Ctx2D,
  resp: ApolloniusResponse | null,
  vp: Viewport,
): number {
  const real = realEntries(resp);
  ctx.strokeStyle = "#4477cc";
  ctx.lineWidth = 1.5;
  for (const e of real) {
    ctx.setLineDash(e.singular ? [4, 4] : []);
    strokeCircle(ctx, vp, e.x.re, e.y.re, Math.abs(e.r.re));
  }
  ctx.setLineDash([]);
  return real.length;
}

function drawInputs(ctx: Ctx2D, circles: InputCircle[], vp: Viewport, rejected: boolean): void {
  ctx.strokeStyle = rejected ? "#cc3333" : "#222222";
  ctx.fillStyle = ctx.strokeStyle;
  ctx.lineWidth = 2.5;
  for (const c of circles) {
    strokeCircle(ctx, vp, c.cx, c.cy, c.r);
    const [px, py] = worldToPixel(vp, c.cx, c.cy);
    ctx.beginPath();
    ctx.arc(px, py, 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

export function renderScene(
  ctx: Ctx2D,
  state: SceneState,
  vp: Viewport,
  width: number,
  height: number,
): { tangentsDrawn: number } {
  ctx.clearRect(0, 0, width, height);
  const tangentsDrawn = drawTangents(ctx, state.latest, vp);
  drawInputs(ctx, state.circles, vp, state.status === "rejected");

  ctx.fillStyle = "#222222";
  ctx.font = "14px sans-serif";
  ctx.fillText(badgeText(state), 12, 22);
  if (state.status === "error") {
    ctx.fillStyle = "#cc3333";
    ctx.fillText("network error — showing last result", 12, 42);
  } else if (state.status === "rejected") {
    ctx.fillStyle = "#cc3333";
    ctx.fillText("degenerate configuration", 12, 42);
  } else if (state.pending) {
    ctx.fillText("solving…", 12, 42);
  }
  return { tangentsDrawn };
}

export type HitMode = "move" | "resize";

export interface Hit {
  index: number;
  mode: HitMode;
}

/** Find the circle handle under a pixel: the center disc moves a circle,
 *  the rim resizes it. Later circles win ties (they draw on top). */
export function hitTest(
  circles: InputCircle[],
  vp: Viewport,
  px: number,
  py: number,
): Hit | null {
  for (let i = circles.length - 1; i >= 0; i--) {
    const c = circles[i];
    const [hx, hy] = worldToPixel(vp, c.cx, c.cy);
    const d = Math.hypot(px - hx, py - hy);
    if (d <= 14) return { index: i, mode: "move" };
    if (Math.abs(d - c.r * vp.scale) <= 10) return { index: i, mode: "resize" };
  }
  return null;
}
