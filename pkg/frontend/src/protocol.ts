// Wire types for the teleop session (documented in ../../protocol.md).
// The console renders exactly what the server sends; it never simulates
// the world on its own, so every field here is display-only truth.

export const PROTOCOL_VERSION = 1;

export type Breath = "n" | "b" | "s";
export type Channels = [Breath, Breath, Breath, Breath];

export const NEUTRAL_CH: Channels = ["n", "n", "n", "n"];

// client -> server

export interface FrameReport {
  type: "frame";
  h: number;
  v: number;
  ch: Channels;
  btn: boolean;
}

export interface TranscriptReport {
  type: "transcript";
  text: string;
}

// server -> client

export interface ConfigMessage {
  type: "config";
  protocol: number;
  role: "pilot" | "spectator";
  scenario: string;
  scenario_digest: string;
  dt: number;
  snapshot_interval_ticks: number;
  max_points: number;
  duration_ticks: number;
}

export interface BasePose {
  x: number;
  y: number;
  yaw: number;
  vx: number;
  vy: number;
  wyaw: number;
}

export interface TaskStatus {
  id: string;
  subgoals: Record<string, boolean>;
  complete: boolean;
}

export interface Snapshot {
  tick: number;
  t: number;
  mode: string;
  mapping: { current: string; in_transition: boolean };
  base: BasePose;
  arm_q: number[];
  ee: { position: number[]; orientation: number[] };
  gripper: { width: number; held: string | null };
  wrench_n: number;
  autonomy: { state: string; reason: string | null };
  objects: Record<string, number[]>;
  fixtures: Record<string, Record<string, unknown>>;
  head: number[] | null;
  tasks: TaskStatus[];
  score: { points: number; max_points: number };
}

export interface StateMessage {
  type: "state";
  protocol: number;
  tick: number;
  t: number;
  failsafe: boolean;
  snapshot: Snapshot;
}

export interface EventMessage {
  type: "event";
  tick: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage =
  | ConfigMessage
  | StateMessage
  | EventMessage
  | ErrorMessage;

const KNOWN_TYPES = new Set(["config", "state", "event", "error"]);

/** Parse one server text frame; null (with a console note) on garbage. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    console.error("unparseable server message:", raw.slice(0, 120));
    return null;
  }
  if (
    typeof msg !== "object" ||
    msg === null ||
    !KNOWN_TYPES.has((msg as { type?: unknown }).type as string)
  ) {
    console.error("unknown server message shape:", raw.slice(0, 120));
    return null;
  }
  return msg as ServerMessage;
}
