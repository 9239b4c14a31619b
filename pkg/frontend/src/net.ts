// Network layer: a debounced, single-flight request scheduler.
//
// Rules it enforces:
//   - at most one request is ever in flight
//   - sends are spaced at least MIN_GAP_MS apart (~30 per second)
//   - when drags outrun the network, only the newest queued payload is
//     sent; superseded ones are silently dropped
// Outcomes are delivered with the sequence number they were submitted
// under, so the model can drop anything that arrives out of order.

import { ApolloniusRequest, ApolloniusResponse } from "./types.js";

export const MIN_GAP_MS = 34;

export type SolveOutcome =
  | { kind: "ok"; body: ApolloniusResponse }
  | { kind: "rejected"; httpStatus: number }
  | { kind: "failed" };

export type SendFn = (req: ApolloniusRequest) => Promise<SolveOutcome>;

export async function postApollonius(
  baseUrl: string,
  req: ApolloniusRequest,
): Promise<SolveOutcome> {
  try {
    const res = await fetch(baseUrl + "/api/apollonius", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    if (res.ok) {
      return { kind: "ok", body: (await res.json()) as ApolloniusResponse };
    }
    if (res.status >= 400 && res.status < 500) {
      return { kind: "rejected", httpStatus: res.status };
    }
    return { kind: "failed" };
  } catch {
    return { kind: "failed" };
  }
}

export class RequestScheduler {
  private wanted: { seq: number; req: ApolloniusRequest } | null = null;
  private inflight = false;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private lastSend = -Infinity;

  constructor(
    private send: SendFn,
    private deliver: (seq: number, outcome: SolveOutcome) => void,
    private gapMs: number = MIN_GAP_MS,
    private now: () => number = () => Date.now(),
  ) {}

  /** Queue a request under its sequence number, superseding any queued
   *  predecessor. It goes out once the gap and single-flight rules allow. */
  submit(seq: number, req: ApolloniusRequest): void {
    this.wanted = { seq, req };
    this.poke();
  }

  private poke(): void {
    if (this.inflight || this.timer !== null || this.wanted === null) return;
    const wait = this.lastSend + this.gapMs - this.now();
    if (wait > 0) {
      this.timer = setTimeout(() => {
        this.timer = null;
        this.poke();
      }, wait);
      return;
    }
    const job = this.wanted;
    this.wanted = null;
    this.inflight = true;
    this.lastSend = this.now();
    void this.send(job.req).then(
      (outcome) => this.finish(job.seq, outcome),
      () => this.finish(job.seq, { kind: "failed" }),
    );
  }

  private finish(seq: number, outcome: SolveOutcome): void {
    this.inflight = false;
    this.deliver(seq, outcome);
    this.poke();
  }
}
