/**
 * Console view-model: a pure reducer over server messages.
 *
 * The view renders exactly this state; nothing here touches the DOM or
 * the socket. Mode changes are confirmation-based: the mode chip only
 * moves when the server echoes it in a state message.
 */

import type { Gate, Hand, Mode, ServerMessage, TrialResultMsg } from "./protocol.js";
import { parseServerMessage, SUPPORTED_PROTO } from "./protocol.js";

export type Connection = "connecting" | "connected" | "lost" | "incompatible";

export interface TrialRow {
  trial: number;
  cued: number;
  decoded: number;
  correct: boolean;
}

export interface Summary {
  accuracy: number;
  tpRate: number | null;
  fpRate: number | null;
  nTrials: number;
  aborted: boolean;
}

export interface ConsoleState {
  connection: Connection;
  hand: Hand;
  mode: Mode;
  margin: number;
  gate: Gate;
  latencyMs: number | null;
  latencyTrace: number[];
  seq: number;
  droppedSamples: number;
  cue: { trial: number; label: "move" | "rest" } | null;
  trials: TrialRow[];
  summary: Summary | null;
  protocolRunning: boolean;
  lastServerAt: number | null; // ms timestamp of the last applied message
  errors: string[];
  warnings: string[];
}

export function initialState(): ConsoleState {
  return {
    connection: "connecting",
    hand: "open",
    mode: "idle",
    margin: 0,
    gate: null,
    latencyMs: null,
    latencyTrace: [],
    seq: 0,
    droppedSamples: 0,
    cue: null,
    trials: [],
    summary: null,
    protocolRunning: false,
    lastServerAt: null,
    errors: [],
    warnings: [],
  };
}

const LATENCY_KEEP = 200;
export const STALE_AFTER_MS = 2000;

function withTrial(trials: TrialRow[], r: TrialResultMsg): TrialRow[] {
  const row = { trial: r.trial, cued: r.cued, decoded: r.decoded, correct: r.correct };
  const out = trials.filter((t) => t.trial !== r.trial);
  out.push(row);
  out.sort((a, b) => a.trial - b.trial);
  return out;
}

/** Apply one parsed server message. Pure: returns a new state. */
export function reduce(state: ConsoleState, msg: ServerMessage, now: number): ConsoleState {
  if (state.connection === "incompatible" && msg.type !== "hello") {
    return state; // refuse to render a mismatched server
  }
  switch (msg.type) {
    case "hello": {
      const compatible = msg.proto === SUPPORTED_PROTO;
      return {
        ...state,
        connection: compatible ? "connected" : "incompatible",
        lastServerAt: now,
        errors: compatible
          ? state.errors
          : [...state.errors, `protocol v${msg.proto} not supported`],
      };
    }
    case "state": {
      const trace =
        msg.latency_ms === null
          ? state.latencyTrace
          : [...state.latencyTrace.slice(-(LATENCY_KEEP - 1)), msg.latency_ms];
      return {
        ...state,
        connection: "connected",
        hand: msg.hand,
        mode: msg.mode,
        margin: msg.margin,
        gate: msg.gate,
        latencyMs: msg.latency_ms,
        latencyTrace: trace,
        seq: msg.seq,
        droppedSamples: msg.dropped_samples,
        lastServerAt: now,
      };
    }
    case "cue":
      return {
        ...state,
        cue: { trial: msg.trial, label: msg.label },
        protocolRunning: true,
        lastServerAt: now,
      };
    case "trial_result":
      return { ...state, trials: withTrial(state.trials, msg), lastServerAt: now };
    case "summary":
      return {
        ...state,
        summary: {
          accuracy: msg.accuracy,
          tpRate: msg.tp_rate,
          fpRate: msg.fp_rate,
          nTrials: msg.n_trials,
          aborted: msg.aborted,
        },
        cue: null,
        protocolRunning: false,
        lastServerAt: now,
      };
    case "error":
      return { ...state, errors: [...state.errors, msg.message], lastServerAt: now };
  }
}

/** Raw socket text -> state; malformed frames are logged, never fatal. */
export function reduceRaw(state: ConsoleState, raw: string, now: number): ConsoleState {
  const msg = parseServerMessage(raw);
  if (msg === null) {
    return { ...state, warnings: [...state.warnings, "ignored malformed message"] };
  }
  return reduce(state, msg, now);
}

export function markConnectionLost(state: ConsoleState): ConsoleState {
  return { ...state, connection: "lost" };
}

/** True when the last server message is older than the staleness window. */
export function isStale(state: ConsoleState, now: number): boolean {
  return state.lastServerAt !== null && now - state.lastServerAt > STALE_AFTER_MS;
}

export function meanLatency(state: ConsoleState): number | null {
  const t = state.latencyTrace;
  if (t.length === 0) return null;
  return t.reduce((a, b) => a + b, 0) / t.length;
}

export function p95Latency(state: ConsoleState): number | null {
  const t = [...state.latencyTrace].sort((a, b) => a - b);
  if (t.length === 0) return null;
  const rank = Math.max(1, Math.ceil(0.95 * t.length));
  return t[rank - 1];
}

/** Render cadence limiter: at least 5 Hz, decimating faster bursts. */
export function renderDue(lastRenderAt: number | null, now: number, minIntervalMs = 100): boolean {
  return lastRenderAt === null || now - lastRenderAt >= minIntervalMs;
}
