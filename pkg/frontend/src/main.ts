// Entry point: wires pointer events to the model, the model to the
// scheduler, and outcomes back into the canvas. The input layer never
// waits on the network — drags update the scene immediately and the
// tangent layer catches up as responses land.

import {
  applyFailure,
  applyRejection,
  applyResponse,
  beginRequest,
  initialState,
  moveCircle,
  resizeCircle,
  SceneState,
} from "./model.js";
import { postApollonius, RequestScheduler } from "./net.js";
import { Hit, hitTest, pixelToWorld, renderScene, Viewport } from "./view.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d") as CanvasRenderingContext2D;

let state: SceneState = initialState();
const vp: Viewport = {
  scale: 80,
  ox: canvas.width / 2,
  oy: canvas.height / 2,
};

function draw(): void {
  renderScene(ctx, state, vp, canvas.width, canvas.height);
}

const scheduler = new RequestScheduler(
  (req) => postApollonius("", req),
  (seq, outcome) => {
    if (outcome.kind === "ok") {
      state = applyResponse(state, seq, outcome.body);
    } else if (outcome.kind === "rejected") {
      state = applyRejection(state, seq);
    } else {
      state = applyFailure(state, seq);
    }
    draw();
  },
);

function requestSolve(): void {
  const [next, seq] = beginRequest(state);
  state = next;
  const req =
    state.session !== null
      ? { circles: state.circles, session: state.session }
      : { circles: state.circles };
  scheduler.submit(seq, req);
  draw();
}

let drag: Hit | null = null;

function pointerPixel(ev: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [ev.clientX - rect.left, ev.clientY - rect.top];
}

canvas.addEventListener("pointerdown", (ev) => {
  const [px, py] = pointerPixel(ev);
  drag = hitTest(state.circles, vp, px, py);
  if (drag !== null) canvas.setPointerCapture(ev.pointerId);
});

canvas.addEventListener("pointermove", (ev) => {
  if (drag === null) return;
  const [px, py] = pointerPixel(ev);
  const [wx, wy] = pixelToWorld(vp, px, py);
  const c = state.circles[drag.index];
  const next =
    drag.mode === "move"
      ? moveCircle(state, drag.index, wx, wy)
      : resizeCircle(state, drag.index, Math.hypot(wx - c.cx, wy - c.cy));
  if (next !== state) {
    state = next;
    requestSolve();
  }
});

const endDrag = (ev: PointerEvent) => {
  if (drag !== null) canvas.releasePointerCapture(ev.pointerId);
  drag = null;
};
canvas.addEventListener("pointerup", endDrag);
canvas.addEventListener("pointercancel", endDrag);

draw();
requestSolve();
