import {
  PROTOCOL_VERSION,
  parseServerMessage,
  type ConfigMessage,
  type EventMessage,
  type FrameReport,
  type StateMessage,
} from "./protocol.js";

// Minimal socket surface shared by the browser WebSocket and the `ws`
// package, so tests can drive the client with a fake.
export interface WebSocketLike {
  send(data: string): void;
  close(code?: number): void;
  readyState: number;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type WebSocketCtor = new (url: string) => WebSocketLike;

const WS_OPEN = 1;

export type ConnState = "connecting" | "open" | "closed";

export interface TranscriptEntry {
  kind: "sent" | "pending" | "voice" | "error" | "info";
  text: string;
}

export interface ClientOptions {
  ws?: WebSocketCtor;
  expectedProtocol?: number;
  /** ms to wait for a voice echo before showing "no command matched" */
  noMatchMs?: number;
  /** ms before an automatic reconnect attempt; 0 disables */
  reconnectMs?: number;
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
  clearTimeoutFn?: (handle: unknown) => void;
}

/**
 * One console session.  Holds the latest config/state from the server
 * and a short transcript log; everything shown in the UI is read from
 * here, and nothing here is ever extrapolated between snapshots.
 */
export class SessionClient {
  conn: ConnState = "closed";
  config: ConfigMessage | null = null;
  state: StateMessage | null = null;
  events: EventMessage[] = [];
  log: TranscriptEntry[] = [];
  /** non-null means the server speaks a different protocol: banner + no frames */
  schemaMismatch: string | null = null;
  toast: string | null = null;

  onUpdate: (() => void) | null = null;
  onState: ((m: StateMessage) => void) | null = null;
  onEvent: ((m: EventMessage) => void) | null = null;

  private socket: WebSocketLike | null = null;
  private closedByUser = false;
  private pending: string[] = [];
  private awaitingEcho: unknown[] = [];
  private readonly wsCtor: WebSocketCtor;
  private readonly expectedProtocol: number;
  private readonly noMatchMs: number;
  private readonly reconnectMs: number;
  private readonly setT: (fn: () => void, ms: number) => unknown;
  private readonly clearT: (handle: unknown) => void;

  constructor(
    readonly url: string,
    opts: ClientOptions = {},
  ) {
    this.wsCtor =
      opts.ws ?? (globalThis as { WebSocket?: WebSocketCtor }).WebSocket!;
    if (!this.wsCtor) throw new Error("no WebSocket implementation");
    this.expectedProtocol = opts.expectedProtocol ?? PROTOCOL_VERSION;
    this.noMatchMs = opts.noMatchMs ?? 800;
    this.reconnectMs = opts.reconnectMs ?? 1000;
    this.setT = opts.setTimeoutFn ?? ((fn, ms) => setTimeout(fn, ms));
    this.clearT =
      opts.clearTimeoutFn ??
      ((h) => clearTimeout(h as Parameters<typeof clearTimeout>[0]));
  }

  get role(): "pilot" | "spectator" | null {
    return this.config?.role ?? null;
  }

  connect(): void {
    if (this.socket && this.conn !== "closed") return;
    this.closedByUser = false;
    this.conn = "connecting";
    const sock = new this.wsCtor(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.conn = "open";
      this.flushPending();
      this.changed();
    };
    sock.onmessage = (ev) => this.handle(String(ev.data));
    sock.onerror = () => {
      // the close handler owns state transitions; just surface it
      console.error("websocket error:", this.url);
    };
    sock.onclose = () => {
      if (this.socket !== sock) return;
      this.conn = "closed";
      this.socket = null;
      if (!this.closedByUser && this.reconnectMs > 0) {
        this.setT(() => this.connect(), this.reconnectMs);
      }
      this.changed();
    };
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
    this.socket = null;
    this.conn = "closed";
  }

  /** Raw device report out; dropped unless we hold the pilot seat. */
  sendFrame(report: FrameReport): boolean {
    if (
      this.schemaMismatch !== null ||
      this.conn !== "open" ||
      this.socket === null ||
      this.socket.readyState !== WS_OPEN ||
      this.role !== "pilot"
    ) {
      return false;
    }
    this.socket.send(JSON.stringify(report));
    return true;
  }

  /** Send a typed utterance; queued (and shown pending) while offline. */
  sendTranscript(text: string): void {
    const trimmed = text.trim();
    if (!trimmed) return;
    if (
      this.conn !== "open" ||
      this.socket === null ||
      this.socket.readyState !== WS_OPEN
    ) {
      this.pending.push(trimmed);
      this.log.push({ kind: "pending", text: trimmed });
      this.changed();
      return;
    }
    this.transmitTranscript(trimmed);
    this.changed();
  }

  private transmitTranscript(text: string): void {
    this.socket!.send(JSON.stringify({ type: "transcript", text }));
    this.log.push({ kind: "sent", text });
    // if nothing comes back as a voice event, the words matched no command
    const timer = this.setT(() => {
      const i = this.awaitingEcho.indexOf(timer);
      if (i >= 0) {
        this.awaitingEcho.splice(i, 1);
        this.toast = "no command matched";
        this.changed();
      }
    }, this.noMatchMs);
    this.awaitingEcho.push(timer);
  }

  private flushPending(): void {
    const queued = this.pending;
    this.pending = [];
    // rewrite the pending markers now that the words actually went out
    for (const entry of this.log) {
      if (entry.kind === "pending") entry.kind = "sent";
    }
    for (const text of queued) {
      this.socket!.send(JSON.stringify({ type: "transcript", text }));
      const timer = this.setT(() => {
        const i = this.awaitingEcho.indexOf(timer);
        if (i >= 0) {
          this.awaitingEcho.splice(i, 1);
          this.toast = "no command matched";
          this.changed();
        }
      }, this.noMatchMs);
      this.awaitingEcho.push(timer);
    }
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  private handle(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) return;
    switch (msg.type) {
      case "config":
        this.config = msg;
        if (msg.protocol !== this.expectedProtocol) {
          this.schemaMismatch =
            `server speaks protocol v${msg.protocol}, this console expects ` +
            `v${this.expectedProtocol} — display only, input disabled`;
        }
        break;
      case "state":
        this.state = msg;
        this.onState?.(msg);
        break;
      case "event":
        this.events.push(msg);
        if (this.events.length > 200) this.events.shift();
        if (msg.kind === "voice") {
          const timer = this.awaitingEcho.shift();
          if (timer !== undefined) this.clearT(timer);
          this.log.push({
            kind: "voice",
            text: `recognized: ${String(msg.payload["command"] ?? "?")}`,
          });
        }
        this.onEvent?.(msg);
        break;
      case "error":
        this.toast = msg.message;
        this.log.push({ kind: "error", text: msg.message });
        break;
    }
    this.changed();
  }

  private changed(): void {
    this.onUpdate?.();
  }
}
