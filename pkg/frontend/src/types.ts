// Wire types for the /api/apollonius contract (schema "v1").
// Complex numbers arrive as {re, im} pairs of doubles.

export interface ComplexNum {
  re: number;
  im: number;
}

export interface InputCircle {
  cx: number;
  cy: number;
  r: number;
}

export interface TangentEntry {
  signs: number[];
  status: string;
  x: ComplexNum;
  y: ComplexNum;
  r: ComplexNum;
  is_real: boolean;
  singular: boolean;
  err: number;
  rco: number;
  res: number;
}

export interface ApolloniusResponse {
  version: string;
  session: string;
  elapsed_ms: number;
  warm: boolean;
  entries: TangentEntry[];
}

export interface ApolloniusRequest {
  circles: InputCircle[];
  session?: string;
}
