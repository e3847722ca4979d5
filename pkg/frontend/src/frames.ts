import type { BindingTable } from "./bindings.js";
import type { Breath, Channels, FrameReport } from "./protocol.js";

// Held keys -> one device report.  The console never routes axes to
// twists itself; a key held across a server-side mapping switch keeps
// reporting the same raw axis, and only the server decides what that
// axis drives.

export class KeyState {
  private down = new Set<string>();
  // true while the transcript box owns the keyboard; bindings go quiet
  typing = false;

  keyDown(code: string): void {
    this.down.add(code);
  }

  keyUp(code: string): void {
    this.down.delete(code);
  }

  clear(): void {
    this.down.clear();
  }

  held(): ReadonlySet<string> {
    return this.typing ? new Set() : this.down;
  }
}

export function buildReport(
  held: ReadonlySet<string>,
  table: BindingTable,
): FrameReport {
  let h = 0;
  let v = 0;
  let btn = false;
  // blow/suck votes per channel; a conflict falls back to neutral
  const blow = [false, false, false, false];
  const suck = [false, false, false, false];
  for (const code of held) {
    const action = table.get(code);
    if (!action) continue;
    if (action === "h+") h += 1;
    else if (action === "h-") h -= 1;
    else if (action === "v+") v += 1;
    else if (action === "v-") v -= 1;
    else if (action === "btn") btn = true;
    else {
      const n = Number(action[2]);
      if (action.endsWith("blow")) blow[n] = true;
      else suck[n] = true;
    }
  }
  const ch = [0, 1, 2, 3].map((i): Breath => {
    if (blow[i] && !suck[i]) return "b";
    if (suck[i] && !blow[i]) return "s";
    return "n";
  }) as Channels;
  return {
    type: "frame",
    h: Math.max(-1, Math.min(1, h)),
    v: Math.max(-1, Math.min(1, v)),
    ch,
    btn,
  };
}

export interface SenderClock {
  now(): number; // ms
  setInterval(fn: () => void, ms: number): unknown;
  clearInterval(handle: unknown): void;
}

const REAL_CLOCK: SenderClock = {
  now: () => Date.now(),
  setInterval: (fn, ms) => setInterval(fn, ms),
  clearInterval: (h) => clearInterval(h as Parameters<typeof clearInterval>[0]),
};

/**
 * Fixed-rate frame stream.  Sends are pinned to an absolute slot grid
 * (one slot per period) polled at twice the rate, so the long-run rate
 * locks to the configured one regardless of timer jitter.  A stall
 * longer than three slots drops its backlog instead of replaying it, so
 * any one-second window holds at most four catch-up sends (+8%, inside
 * the ±10% budget), and a half-period floor between sends rules out
 * same-instant bursts.
 */
export class FrameSender {
  private handle: unknown = null;
  private nextDue = -Infinity;
  private lastSent = -Infinity;
  readonly periodMs: number;

  constructor(
    private readonly send: (report: FrameReport) => void,
    private readonly keys: KeyState,
    private table: BindingTable,
    hz = 50,
    private readonly clock: SenderClock = REAL_CLOCK,
  ) {
    if (!(hz > 0)) throw new Error("frame rate must be > 0");
    this.periodMs = 1000 / hz;
  }

  setBindings(table: BindingTable): void {
    this.table = table;
  }

  start(): void {
    if (this.handle !== null) return;
    this.handle = this.clock.setInterval(() => this.tick(), this.periodMs / 2);
  }

  stop(): void {
    if (this.handle !== null) {
      this.clock.clearInterval(this.handle);
      this.handle = null;
    }
  }

  /** One timer callback; returns whether a frame actually went out. */
  tick(): boolean {
    const t = this.clock.now();
    if (t < this.nextDue) return false;
    if (t - this.lastSent < this.periodMs * 0.5) return false;
    if (t - this.nextDue > 3 * this.periodMs) {
      this.nextDue = t; // stalled: the missed frames are stale, drop them
    }
    this.send(buildReport(this.keys.held(), this.table));
    this.lastSent = t;
    this.nextDue += this.periodMs;
    return true;
  }
}
