import {
  DEFAULT_BINDINGS,
  DEFAULT_BINDINGS_TEXT,
  parseBindings,
  type BindingTable,
} from "./bindings.js";
import { SessionClient } from "./client.js";
import { FrameSender, KeyState } from "./frames.js";
import { renderSide, renderTop, type Ctx2D, type Viewport } from "./render.js";

// Console shell.  All state shown here comes from the latest server
// message; the render loop is a plain projection of client.state.

const params = new URLSearchParams(location.search);
const url = params.get("url") ?? "ws://127.0.0.1:8765";
const frameHz = Number(params.get("hz") ?? 50);

const $ = (id: string) => document.getElementById(id)!;
const topCanvas = $("top") as HTMLCanvasElement;
const sideCanvas = $("side") as HTMLCanvasElement;
const sayInput = $("say") as HTMLInputElement;
const bindingsBox = $("bindings") as HTMLTextAreaElement;
const bindingsErr = $("bindings-err");
const logBox = $("log");
const banner = $("banner");
const toastBox = $("toast");

let bindings: BindingTable = DEFAULT_BINDINGS;
const saved = localStorage.getItem("quadassist-bindings");
bindingsBox.value = saved ?? DEFAULT_BINDINGS_TEXT;
if (saved !== null) {
  try {
    bindings = parseBindings(saved);
  } catch (err) {
    console.error("saved bindings ignored:", err);
  }
}

const keys = new KeyState();
const client = new SessionClient(url);
const sender = new FrameSender((r) => client.sendFrame(r), keys, bindings, frameHz);

window.addEventListener("keydown", (e) => {
  const t = e.target as HTMLElement | null;
  // skip bindings while typing in an input
  if (t && (t.tagName === "INPUT" || t.tagName === "TEXTAREA")) return;
  keys.keyDown(e.code);
  if (e.code === "Space") e.preventDefault();
});
window.addEventListener("keyup", (e) => keys.keyUp(e.code));
window.addEventListener("blur", () => keys.clear());
sayInput.addEventListener("focus", () => {
  keys.clear();
  keys.typing = true;
});
sayInput.addEventListener("blur", () => {
  keys.typing = false;
});

($("say-form") as HTMLFormElement).addEventListener("submit", (e) => {
  e.preventDefault();
  client.sendTranscript(sayInput.value);
  sayInput.value = "";
});

$("bindings-apply").addEventListener("click", () => {
  try {
    bindings = parseBindings(bindingsBox.value);
    sender.setBindings(bindings);
    localStorage.setItem("quadassist-bindings", bindingsBox.value);
    bindingsErr.textContent = "saved";
  } catch (err) {
    bindingsErr.textContent = String(err instanceof Error ? err.message : err);
  }
});

client.onUpdate = () => {
  refreshText();
};
client.connect();
sender.start();

let toastShown: string | null = null;
let toastTimer: ReturnType<typeof setTimeout> | null = null;

function refreshText(): void {
  const cfg = client.config;
  const st = client.state;
  $("conn").textContent = client.conn;
  $("role").textContent = cfg ? cfg.role : "—";
  $("scenario").textContent = cfg ? cfg.scenario : "—";
  if (st) {
    const s = st.snapshot;
    $("tick").textContent = `t=${st.t.toFixed(2)}s`;
    $("mode").textContent = s.mode;
    $("mapping").textContent =
      s.mapping.current + (s.mapping.in_transition ? " (switching…)" : "");
    $("autonomy").textContent = s.autonomy.state;
    $("score").textContent = `${s.score.points}/${s.score.max_points}`;
    $("wrench").textContent = `${s.wrench_n.toFixed(1)} N`;
    $("gripper").textContent =
      `${(s.gripper.width * 1000).toFixed(0)} mm` +
      (s.gripper.held ? ` (${s.gripper.held})` : "");
    $("failsafe").textContent = st.failsafe ? "FAILSAFE" : "";
    const ft = $("facetouch");
    ft.textContent = s.autonomy.state === "idle" ? "" : `face touch: ${s.autonomy.state}`;
    const tasks = s.tasks
      .map((t) => `${t.complete ? "✓" : "·"} ${t.id}`)
      .join("   ");
    $("tasks").textContent = tasks;
  }
  banner.textContent = client.schemaMismatch ?? "";
  banner.style.display = client.schemaMismatch ? "block" : "none";
  if (client.toast && client.toast !== toastShown) {
    toastShown = client.toast;
    toastBox.textContent = client.toast;
    toastBox.style.display = "block";
    if (toastTimer) clearTimeout(toastTimer);
    toastTimer = setTimeout(() => {
      toastBox.style.display = "none";
      toastShown = null;
      client.toast = null;
    }, 2500);
  }
  logBox.textContent = client.log
    .slice(-12)
    .map((e) => `[${e.kind}] ${e.text}`)
    .join("\n");
}

function viewport(canvas: HTMLCanvasElement, cx: number, cy: number): Viewport {
  return { w: canvas.width, h: canvas.height, scale: 60, cx, cy };
}

function draw(): void {
  const st = client.state;
  if (st) {
    const s = st.snapshot;
    const topCtx = topCanvas.getContext("2d") as unknown as Ctx2D;
    const sideCtx = sideCanvas.getContext("2d") as unknown as Ctx2D;
    renderTop(topCtx, viewport(topCanvas, s.base.x, s.base.y), s);
    renderSide(sideCtx, viewport(sideCanvas, s.base.x, 1.2), s);
  }
  requestAnimationFrame(draw);
}
requestAnimationFrame(draw);
