import { beforeEach, describe, expect, it } from "vitest";
import { SessionClient, type WebSocketLike } from "../src/client.js";
import type { FrameReport } from "../src/protocol.js";

class FakeSocket implements WebSocketLike {
  static instances: FakeSocket[] = [];
  sent: string[] = [];
  readyState = 0; // CONNECTING
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  constructor(public url: string) {
    FakeSocket.instances.push(this);
  }

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.readyState = 3;
    this.onclose?.();
  }

  // test-side controls
  open(): void {
    this.readyState = 1;
    this.onopen?.();
  }

  drop(): void {
    this.readyState = 3;
    this.onclose?.();
  }

  push(msg: unknown): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }
}

interface FakeTimer {
  fn: () => void;
  ms: number;
  cancelled: boolean;
}

class FakeTimers {
  list: FakeTimer[] = [];
  set = (fn: () => void, ms: number): unknown => {
    const t: FakeTimer = { fn, ms, cancelled: false };
    this.list.push(t);
    return t;
  };
  clear = (handle: unknown): void => {
    (handle as FakeTimer).cancelled = true;
  };
  fire(i = 0): void {
    const t = this.list[i]!;
    if (!t.cancelled) t.fn();
  }
}

function cfg(role = "pilot", protocol = 1) {
  return {
    type: "config",
    protocol,
    role,
    scenario: "served",
    scenario_digest: "d".repeat(64),
    dt: 0.01,
    snapshot_interval_ticks: 3,
    max_points: 2,
    duration_ticks: 1000,
  };
}

function stateMsg(tick: number, y: number) {
  return {
    type: "state",
    protocol: 1,
    tick,
    t: tick * 0.01,
    failsafe: false,
    snapshot: {
      tick,
      t: tick * 0.01,
      mode: "base",
      mapping: { current: "primary", in_transition: false },
      base: { x: 0, y, yaw: 0, vx: 0, vy: 0.5, wyaw: 0 },
      arm_q: [0, 0, 0, 0, 0, 0],
      ee: { position: [0.4, 0, 0.8], orientation: [1, 0, 0, 0] },
      gripper: { width: 0.08, held: null },
      wrench_n: 0,
      autonomy: { state: "idle", reason: null },
      objects: {},
      fixtures: {},
      head: null,
      tasks: [],
      score: { points: 0, max_points: 2 },
    },
  };
}

const FRAME: FrameReport = {
  type: "frame",
  h: 0,
  v: 1,
  ch: ["n", "n", "n", "n"],
  btn: false,
};

let timers: FakeTimers;

function makeClient(opts: { expectedProtocol?: number; reconnectMs?: number } = {}) {
  timers = new FakeTimers();
  const client = new SessionClient("ws://test", {
    ws: FakeSocket as unknown as new (url: string) => WebSocketLike,
    noMatchMs: 800,
    reconnectMs: 0,
    setTimeoutFn: timers.set,
    clearTimeoutFn: timers.clear,
    ...opts,
  });
  return client;
}

beforeEach(() => {
  FakeSocket.instances = [];
});

describe("SessionClient", () => {
  it("exposes config and sends pilot frames once open", () => {
    const c = makeClient();
    c.connect();
    const s = FakeSocket.instances[0]!;
    expect(c.conn).toBe("connecting");
    expect(c.sendFrame(FRAME)).toBe(false); // not open yet
    s.open();
    expect(c.sendFrame(FRAME)).toBe(false); // role unknown yet
    s.push(cfg());
    expect(c.role).toBe("pilot");
    expect(c.sendFrame(FRAME)).toBe(true);
    expect(JSON.parse(s.sent[0]!)).toEqual(FRAME);
  });

  it("shows the server state verbatim, never an extrapolation", () => {
    const c = makeClient();
    c.connect();
    const s = FakeSocket.instances[0]!;
    s.open();
    s.push(cfg());
    s.push(stateMsg(30, 0.125));
    expect(c.state!.snapshot.base.y).toBe(0.125);
    expect(c.state!.tick).toBe(30);
    s.push(stateMsg(33, 0.14));
    expect(c.state!.snapshot.base.y).toBe(0.14); // replaced, not blended
  });

  it("raises the schema banner and refuses input on a protocol mismatch", () => {
    const c = makeClient();
    c.connect();
    const s = FakeSocket.instances[0]!;
    s.open();
    s.push(cfg("pilot", 2)); // perturbed version
    expect(c.schemaMismatch).toMatch(/protocol v2/);
    expect(c.schemaMismatch).toMatch(/v1/);
    expect(c.sendFrame(FRAME)).toBe(false);
    expect(s.sent).toEqual([]);
  });

  it("never sends frames from the spectator seat", () => {
    const c = makeClient();
    c.connect();
    const s = FakeSocket.instances[0]!;
    s.open();
    s.push(cfg("spectator"));
    expect(c.sendFrame(FRAME)).toBe(false);
    expect(s.sent).toEqual([]);
  });

  it("surfaces server error messages as a toast", () => {
    const c = makeClient();
    c.connect();
    const s = FakeSocket.instances[0]!;
    s.open();
    s.push({ type: "error", message: "only the pilot sends frames" });
    expect(c.toast).toBe("only the pilot sends frames");
    expect(c.log.at(-1)).toEqual({
      kind: "error",
      text: "only the pilot sends frames",
    });
  });

  it("queues transcripts while disconnected and flushes on reconnect", () => {
    const c = makeClient();
    c.sendTranscript("stop");
    c.sendTranscript("start");
    expect(c.pendingCount).toBe(2);
    expect(c.log.map((e) => e.kind)).toEqual(["pending", "pending"]);

    c.connect();
    const s = FakeSocket.instances[0]!;
    s.open();
    expect(c.pendingCount).toBe(0);
    expect(s.sent.map((d) => JSON.parse(d))).toEqual([
      { type: "transcript", text: "stop" },
      { type: "transcript", text: "start" },
    ]);
    expect(c.log.map((e) => e.kind)).toEqual(["sent", "sent"]);
  });

  it("echoes recognized voice commands into the transcript log", () => {
    const c = makeClient();
    c.connect();
    const s = FakeSocket.instances[0]!;
    s.open();
    s.push(cfg());
    c.sendTranscript("please stop now");
    s.push({ type: "event", tick: 12, kind: "voice", payload: { command: "STOP" } });
    expect(c.log.at(-1)).toEqual({ kind: "voice", text: "recognized: STOP" });
    // the echo consumed the no-match timer
    expect(timers.list[0]!.cancelled).toBe(true);
    expect(c.toast).toBeNull();
  });

  it('toasts "no command matched" when nothing echoes back', () => {
    const c = makeClient();
    c.connect();
    const s = FakeSocket.instances[0]!;
    s.open();
    s.push(cfg());
    c.sendTranscript("xyzzy");
    timers.fire(0);
    expect(c.toast).toBe("no command matched");
  });

  it("reconnects by itself after an unexpected close", () => {
    const c = makeClient({ reconnectMs: 250 });
    c.connect();
    const s = FakeSocket.instances[0]!;
    s.open();
    s.drop();
    expect(c.conn).toBe("closed");
    const retry = timers.list.find((t) => t.ms === 250);
    expect(retry).toBeDefined();
    retry!.fn();
    expect(FakeSocket.instances.length).toBe(2);
    expect(c.conn).toBe("connecting");
  });

  it("stays closed after close() by the user", () => {
    const c = makeClient({ reconnectMs: 250 });
    c.connect();
    FakeSocket.instances[0]!.open();
    c.close();
    expect(timers.list.find((t) => t.ms === 250)).toBeUndefined();
    expect(c.conn).toBe("closed");
  });
});
