// Keyboard bindings: a small line-oriented text format the pilot can edit
// in the console and keep in a file.  One binding per line,
//
//     <KeyboardEvent.code> = <action>
//
// '#' starts a comment, blank lines are ignored.  Actions:
//
//     h+ h- v+ v-      joystick axes (held keys sum, opposites cancel)
//     chN:blow chN:suck breath channel N in 0..3
//     btn              push button
//
// What a channel or axis *does* is decided by the server's routing, never
// here: the console always reports raw device state.

export type Action =
  | "h+"
  | "h-"
  | "v+"
  | "v-"
  | "btn"
  | `ch${0 | 1 | 2 | 3}:${"blow" | "suck"}`;

export type BindingTable = Map<string, Action>;

const ACTION_RE = /^(h\+|h-|v\+|v-|btn|ch[0-3]:(blow|suck))$/;

export const DEFAULT_BINDINGS_TEXT = `# quadassist console bindings
# key codes: KeyW, ArrowUp, Space, Digit1, ... (KeyboardEvent.code)
KeyW = v+
KeyS = v-
KeyA = h-
KeyD = h+
KeyQ = ch1:blow
KeyE = ch1:suck
KeyG = ch0:blow
KeyF = ch0:suck
KeyO = ch2:blow
KeyC = ch2:suck
KeyM = ch3:blow
Space = btn
`;

export function parseBindings(text: string): BindingTable {
  const table: BindingTable = new Map();
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = (lines[i] ?? "").replace(/#.*$/, "").trim();
    if (!line) continue;
    const eq = line.indexOf("=");
    if (eq < 0) {
      throw new Error(`bindings line ${i + 1}: expected "<key> = <action>"`);
    }
    const key = line.slice(0, eq).trim();
    const action = line.slice(eq + 1).trim();
    if (!key) {
      throw new Error(`bindings line ${i + 1}: empty key`);
    }
    if (!ACTION_RE.test(action)) {
      throw new Error(
        `bindings line ${i + 1}: unknown action "${action}" ` +
          "(h+/h-/v+/v-, ch0..ch3:blow|suck, btn)",
      );
    }
    if (table.has(key)) {
      throw new Error(`bindings line ${i + 1}: "${key}" bound twice`);
    }
    table.set(key, action as Action);
  }
  return table;
}

export const DEFAULT_BINDINGS: BindingTable = parseBindings(
  DEFAULT_BINDINGS_TEXT,
);
