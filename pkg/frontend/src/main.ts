/**
 * Browser entry point: wires the session socket to the reducer and the
 * renderer, and binds the operator controls.
 */

import { initialState, markConnectionLost, reduceRaw, renderDue } from "./state.js";
import type { ConsoleState } from "./state.js";
import { SessionSocket } from "./socket.js";
import { render } from "./view.js";

function serviceUrl(): string {
  const params = new URLSearchParams(location.search);
  return params.get("server") ?? `ws://${location.hostname || "127.0.0.1"}:8765/`;
}

let state: ConsoleState = initialState();
let lastRenderAt: number | null = null;

function paint(force = false): void {
  const now = Date.now();
  if (!force && !renderDue(lastRenderAt, now)) return;
  lastRenderAt = now;
  render(state, now);
}

const socket = new SessionSocket(
  serviceUrl(),
  {
    onText(raw) {
      state = reduceRaw(state, raw, Date.now());
      paint();
    },
    onOpen() {
      paint(true);
    },
    onLost() {
      state = markConnectionLost(state);
      paint(true);
    },
  },
  (url) => new WebSocket(url),
);

function bind(id: string, fn: () => void): void {
  const node = document.getElementById(id);
  if (node) node.addEventListener("click", fn);
}

function sendOrBanner(ok: boolean): void {
  const banner = document.getElementById("disconnected-banner");
  if (banner) banner.hidden = ok;
}

bind("btn-active", () => sendOrBanner(socket.send({ type: "set_mode", mode: "active" })));
bind("btn-passive", () => sendOrBanner(socket.send({ type: "set_mode", mode: "passive" })));
bind("btn-idle", () => sendOrBanner(socket.send({ type: "set_mode", mode: "idle" })));

bind("btn-start", () => {
  const trials = Number((document.getElementById("in-trials") as HTMLInputElement).value);
  const cueS = Number((document.getElementById("in-cue") as HTMLInputElement).value);
  const restS = Number((document.getElementById("in-rest") as HTMLInputElement).value);
  if (!(trials > 0)) return; // guarded by the disabled state as well
  sendOrBanner(socket.send({
    type: "start_protocol", trials, cue_s: cueS, rest_s: restS,
  }));
});
bind("btn-stop", () => sendOrBanner(socket.send({ type: "stop" })));

const trialsInput = document.getElementById("in-trials") as HTMLInputElement | null;
const startButton = document.getElementById("btn-start") as HTMLButtonElement | null;
if (trialsInput && startButton) {
  const sync = () => {
    startButton.disabled = !(Number(trialsInput.value) > 0);
  };
  trialsInput.addEventListener("input", sync);
  sync();
}

// staleness flag needs a ticker even when no messages arrive
setInterval(() => paint(true), 500);

socket.connect();
