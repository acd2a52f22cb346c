/**
 * DOM renderer: maps ConsoleState 1:1 onto the page. All decisions live
 * in the reducer; this file only paints.
 */

import type { ConsoleState } from "./state.js";
import { isStale, meanLatency, p95Latency } from "./state.js";

const HAND_PATHS: Record<string, string> = {
  // stylized palm + finger strokes; closed tucks the fingertips in
  open: "M20 78 V38 Q20 28 29 28 Q37 28 37 38 V20 Q37 10 46 10 Q54 10 54 20 V36 " +
        "Q57 8 66 12 Q73 15 68 38 L66 50 Q80 44 82 54 Q83 62 70 68 L56 78 Z",
  closed: "M20 72 V46 Q20 38 29 40 Q37 42 37 50 Q37 40 46 42 Q54 44 53 52 " +
          "Q56 42 64 46 Q70 50 66 58 L64 62 Q76 60 77 66 Q78 72 68 74 L54 80 Z",
  moving: "M22 76 V40 Q22 31 30 31 Q38 31 38 40 V26 Q38 17 46 17 Q54 17 54 26 V38 " +
          "Q58 12 66 16 Q72 19 68 42 L65 54 Q78 49 80 58 Q81 65 69 70 L55 79 Z",
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fmt(v: number | null, digits = 1, unit = ""): string {
  return v === null ? "—" : `${v.toFixed(digits)}${unit}`;
}

export function render(state: ConsoleState, now: number): void {
  el("conn-chip").textContent = state.connection;
  el("conn-chip").dataset.value = state.connection;
  el("stale-flag").hidden = !isStale(state, now);

  const hand = el("hand-path");
  hand.setAttribute("d", HAND_PATHS[state.hand] ?? HAND_PATHS.open);
  el("hand-label").textContent = state.hand;
  el("hand-card").dataset.hand = state.hand;

  el("mode-chip").textContent = state.mode;
  el("mode-chip").dataset.value = state.mode;

  // signed margin gauge: -1 .. +1 mapped onto a centered bar
  const gauge = el("margin-fill");
  const pct = Math.max(-1, Math.min(1, state.margin)) * 50;
  gauge.style.left = `${Math.min(50, 50 + pct)}%`;
  gauge.style.width = `${Math.abs(pct)}%`;
  gauge.dataset.sign = state.margin >= 0 ? "move" : "rest";
  el("margin-value").textContent = state.margin.toFixed(2);

  const gate = el("gate-badge");
  gate.textContent = state.gate ?? "—";
  gate.dataset.value = state.gate ?? "none";

  el("latency-now").textContent = fmt(state.latencyMs, 1, " ms");
  el("latency-mean").textContent = fmt(meanLatency(state), 1, " ms");
  el("latency-p95").textContent = fmt(p95Latency(state), 1, " ms");
  el("dropped").textContent = String(state.droppedSamples);

  const cue = el("cue-banner");
  cue.hidden = state.cue === null;
  if (state.cue !== null) {
    cue.textContent = `trial ${state.cue.trial + 1}: ${state.cue.label.toUpperCase()}`;
    cue.dataset.label = state.cue.label;
  }

  const tbody = el<HTMLTableSectionElement>("trial-rows");
  tbody.innerHTML = "";
  for (const t of state.trials) {
    const tr = document.createElement("tr");
    tr.dataset.correct = String(t.correct);
    tr.innerHTML =
      `<td>${t.trial + 1}</td>` +
      `<td>${t.cued ? "move" : "rest"}</td>` +
      `<td>${t.decoded ? "move" : "rest"}</td>` +
      `<td>${t.correct ? "✓" : "✗"}</td>`;
    tbody.appendChild(tr);
  }

  const summary = el("summary-card");
  summary.hidden = state.summary === null;
  if (state.summary !== null) {
    const s = state.summary;
    el("summary-partial").hidden = !s.aborted;
    el("acc-bar").style.width = `${(s.accuracy * 100).toFixed(1)}%`;
    el("acc-value").textContent = `${(s.accuracy * 100).toFixed(1)}%`;
    el("tp-value").textContent = s.tpRate === null ? "—" : s.tpRate.toFixed(2);
    el("fp-value").textContent = s.fpRate === null ? "—" : s.fpRate.toFixed(2);
    el("summary-n").textContent = String(s.nTrials);
  }

  const log = el("event-log");
  const lines = [...state.errors.map((e) => `error: ${e}`),
                 ...state.warnings.slice(-5)];
  log.textContent = lines.slice(-8).join("\n");
}
