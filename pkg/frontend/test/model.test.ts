import { describe, expect, it } from "vitest";

import {
  applyFailure,
  applyRejection,
  applyResponse,
  badgeText,
  beginRequest,
  initialState,
  MIN_RADIUS,
  moveCircle,
  realEntries,
  resizeCircle,
} from "../src/model.js";
import { ApolloniusResponse, TangentEntry } from "../src/types.js";

function entry(over: Partial<TangentEntry> = {}): TangentEntry {
  return {
    signs: [1, 1, 1],
    status: "converged",
    x: { re: 0.5, im: 0 },
    y: { re: -0.25, im: 0 },
    r: { re: 1.5, im: 0 },
    is_real: true,
    singular: false,
    err: 1e-15,
    rco: 0.3,
    res: 1e-14,
    ...over,
  };
}

function response(entries: TangentEntry[], session = "f".repeat(32)): ApolloniusResponse {
  return { version: "v1", session, elapsed_ms: 20, warm: false, entries };
}

describe("drag reducers", () => {
  it("moving a circle replaces only that circle", () => {
    const s0 = initialState();
    const s1 = moveCircle(s0, 1, 0.25, -0.75);
    expect(s1.circles[1]).toEqual({ cx: 0.25, cy: -0.75, r: s0.circles[1].r });
    expect(s1.circles[0]).toBe(s0.circles[0]);
    expect(s1.circles[2]).toBe(s0.circles[2]);
  });

  it("a motionless move is the identity, so no request fires", () => {
    const s0 = initialState();
    const c = s0.circles[2];
    expect(moveCircle(s0, 2, c.cx, c.cy)).toBe(s0);
  });

  it("the radius handle is clamped strictly positive", () => {
    const s0 = initialState();
    expect(resizeCircle(s0, 0, -3).circles[0].r).toBe(MIN_RADIUS);
    expect(resizeCircle(s0, 0, 0).circles[0].r).toBe(MIN_RADIUS);
    expect(resizeCircle(s0, 0, 2.5).circles[0].r).toBe(2.5);
  });

  it("a resize landing on the current radius is the identity", () => {
    const s0 = initialState();
    expect(resizeCircle(s0, 0, s0.circles[0].r)).toBe(s0);
  });
});

describe("request lifecycle", () => {
  it("beginRequest hands out increasing sequence numbers", () => {
    const [s1, a] = beginRequest(initialState());
    const [s2, b] = beginRequest(s1);
    expect(b).toBe(a + 1);
    expect(s2.pending).toBe(true);
    expect(s2.status).toBe("pending");
  });

  it("a response stores the tangent layer and the session token", () => {
    const [s1, seq] = beginRequest(initialState());
    const resp = response([entry()], "a".repeat(32));
    const s2 = applyResponse(s1, seq, resp);
    expect(s2.latest).toBe(resp);
    expect(s2.session).toBe("a".repeat(32));
    expect(s2.pending).toBe(false);
    expect(s2.status).toBe("idle");
  });

  it("stale responses are dropped: the newest applied sequence wins", () => {
    let s = initialState();
    let seqA: number, seqB: number;
    [s, seqA] = beginRequest(s);
    [s, seqB] = beginRequest(s);
    const newer = response([entry(), entry()]);
    const older = response([entry()]);
    s = applyResponse(s, seqB, newer);
    const after = applyResponse(s, seqA, older);
    expect(after).toBe(s);
    expect(after.latest).toBe(newer);
  });

  it("a duplicate of an applied sequence is dropped too", () => {
    let s = initialState();
    let seq: number;
    [s, seq] = beginRequest(s);
    s = applyResponse(s, seq, response([entry()]));
    expect(applyResponse(s, seq, response([]))).toBe(s);
  });

  it("network failure keeps the last good render", () => {
    let s = initialState();
    let seq: number;
    [s, seq] = beginRequest(s);
    const resp = response([entry()]);
    s = applyResponse(s, seq, resp);
    [s, seq] = beginRequest(s);
    const failed = applyFailure(s, seq);
    expect(failed.latest).toBe(resp);
    expect(failed.status).toBe("error");
    expect(failed.pending).toBe(false);
  });

  it("a rejection clears the tangent layer and flags the inputs", () => {
    let s = initialState();
    let seq: number;
    [s, seq] = beginRequest(s);
    s = applyResponse(s, seq, response([entry()]));
    [s, seq] = beginRequest(s);
    const rejected = applyRejection(s, seq);
    expect(rejected.latest).toBeNull();
    expect(rejected.status).toBe("rejected");
  });

  it("an outcome older than the applied one cannot clear a newer render", () => {
    let s = initialState();
    let seqA: number, seqB: number;
    [s, seqA] = beginRequest(s);
    [s, seqB] = beginRequest(s);
    const resp = response([entry()]);
    s = applyResponse(s, seqB, resp);
    expect(applyRejection(s, seqA).latest).toBe(resp);
    expect(applyFailure(s, seqA)).toBe(s);
  });
});

describe("real-solution selection", () => {
  it("only is_real entries are renderable", () => {
    const resp = response([
      entry(),
      entry({ is_real: false, r: { re: 1.0, im: 0.8 } }),
      entry({ is_real: false, x: { re: 0.1, im: 2.0 } }),
      entry(),
    ]);
    expect(realEntries(resp)).toHaveLength(2);
    expect(realEntries(null)).toHaveLength(0);
  });

  it("the badge counts real entries out of the full set", () => {
    const mixed = [
      entry(),
      entry(),
      entry({ is_real: false }),
      entry({ is_real: false }),
      entry({ is_real: false }),
      entry({ is_real: false }),
      entry({ is_real: false }),
      entry({ is_real: false }),
    ];
    let s = initialState();
    expect(badgeText(s)).toBe("no solutions");
    let seq: number;
    [s, seq] = beginRequest(s);
    s = applyResponse(s, seq, response(mixed));
    expect(badgeText(s)).toBe("2 of 8 real");
    [s, seq] = beginRequest(s);
    s = applyResponse(s, seq, response(mixed.map((e) => ({ ...e, is_real: false }))));
    expect(badgeText(s)).toBe("0 of 8 real");
  });
});
