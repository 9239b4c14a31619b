// Scene state and reducers. Pure functions only — the network and canvas
// layers sit elsewhere, which is what keeps dragging responsive while a
// solve is in flight. Reducers return the input object unchanged when a
// change is a no-op, so callers can use identity to skip useless work
// (a drag release with no motion must not trigger a request).

import { ApolloniusResponse, InputCircle, TangentEntry } from "./types.js";

export const MIN_RADIUS = 0.05;

export type FetchStatus = "idle" | "pending" | "error" | "rejected";

export interface SceneState {
  circles: InputCircle[];
  session: string | null;
  latest: ApolloniusResponse | null;
  nextSeq: number;
  appliedSeq: number;
  pending: boolean;
  status: FetchStatus;
}

export function initialState(): SceneState {
  return {
    circles: [
      { cx: -1.6, cy: 1.0, r: 1.0 },
      { cx: 1.6, cy: 1.0, r: 1.0 },
      { cx: 0.0, cy: -1.4, r: 1.0 },
    ],
    session: null,
    latest: null,
    nextSeq: 1,
    appliedSeq: 0,
    pending: false,
    status: "idle",
  };
}

export function moveCircle(
  state: SceneState,
  index: number,
  cx: number,
  cy: number,
): SceneState {
  const c = state.circles[index];
  if (c.cx === cx && c.cy === cy) return state;
  const circles = state.circles.slice();
  circles[index] = { cx, cy, r: c.r };
  return { ...state, circles };
}

export function resizeCircle(
  state: SceneState,
  index: number,
  r: number,
): SceneState {
  const clamped = Math.max(MIN_RADIUS, r);
  const c = state.circles[index];
  if (c.r === clamped) return state;
  const circles = state.circles.slice();
  circles[index] = { cx: c.cx, cy: c.cy, r: clamped };
  return { ...state, circles };
}

/** Hand out the next sequence number and mark the scene pending. */
export function beginRequest(state: SceneState): [SceneState, number] {
  const seq = state.nextSeq;
  return [{ ...state, nextSeq: seq + 1, pending: true, status: "pending" }, seq];
}

function stale(state: SceneState, seq: number): boolean {
  return seq <= state.appliedSeq;
}

/** Apply a successful solve. Stale responses (an older request finishing
 *  after a newer one) are dropped: the newest applied sequence wins. */
export function applyResponse(
  state: SceneState,
  seq: number,
  resp: ApolloniusResponse,
): SceneState {
  if (stale(state, seq)) return state;
  return {
    ...state,
    latest: resp,
    session: resp.session,
    appliedSeq: seq,
    pending: seq + 1 < state.nextSeq ? state.pending : false,
    status: "idle",
  };
}

/** Network failure: keep the last good render, flag the badge. */
export function applyFailure(state: SceneState, seq: number): SceneState {
  if (stale(state, seq)) return state;
  return { ...state, appliedSeq: seq, pending: false, status: "error" };
}

/** Server-side rejection (422): the configuration itself is bad, so the
 *  tangent layer is cleared and the inputs get highlighted. */
export function applyRejection(state: SceneState, seq: number): SceneState {
  if (stale(state, seq)) return state;
  return {
    ...state,
    latest: null,
    appliedSeq: seq,
    pending: false,
    status: "rejected",
  };
}

/** The tangent circles that may be drawn: real solutions only. */
export function realEntries(resp: ApolloniusResponse | null): TangentEntry[] {
  if (resp === null) return [];
  return resp.entries.filter((e) => e.is_real);
}

export function badgeText(state: SceneState): string {
  if (state.latest === null) return "no solutions";
  const total = state.latest.entries.length;
  return `${realEntries(state.latest).length} of ${total} real`;
}
