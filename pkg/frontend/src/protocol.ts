/**
 * Session-service message schema, protocol version 1.
 *
 * The console may only ever originate the three client message types
 * below; everything else it does is rendering.
 */

export const SUPPORTED_PROTO = 1;

export type Hand = "open" | "closed" | "moving";
export type Mode = "active" | "passive" | "idle";
export type Gate = "accepted" | "low_confidence" | "artifact" | null;

export interface HelloMsg {
  type: "hello";
  proto: number;
}

export interface StateMsg {
  type: "state";
  hand: Hand;
  mode: Mode;
  margin: number;
  gate: Gate;
  latency_ms: number | null;
  seq: number;
  trials: number;
  dropped_samples: number;
}

export interface CueMsg {
  type: "cue";
  trial: number;
  label: "move" | "rest";
}

export interface TrialResultMsg {
  type: "trial_result";
  trial: number;
  cued: number;
  decoded: number;
  correct: boolean;
}

export interface SummaryMsg {
  type: "summary";
  accuracy: number;
  tp_rate: number | null;
  fp_rate: number | null;
  n_trials: number;
  aborted: boolean;
  report: unknown;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMessage =
  | HelloMsg
  | StateMsg
  | CueMsg
  | TrialResultMsg
  | SummaryMsg
  | ErrorMsg;

export const SERVER_MESSAGE_TYPES = [
  "hello",
  "state",
  "cue",
  "trial_result",
  "summary",
  "error",
] as const;

/** The complete set of messages the console is allowed to send. */
export type ClientMessage =
  | { type: "set_mode"; mode: Mode }
  | { type: "start_protocol"; trials: number; cue_s: number; rest_s: number }
  | { type: "stop" };

export const CLIENT_MESSAGE_TYPES = ["set_mode", "start_protocol", "stop"] as const;

const HANDS: readonly string[] = ["open", "closed", "moving"];
const MODES: readonly string[] = ["active", "passive", "idle"];

/**
 * Defensive parse: returns a typed message or null. Malformed input is
 * the caller's cue to log and ignore, never to crash.
 */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as Record<string, unknown>;
  switch (msg.type) {
    case "hello":
      return typeof msg.proto === "number" ? (msg as unknown as HelloMsg) : null;
    case "state":
      if (
        typeof msg.hand === "string" && HANDS.includes(msg.hand) &&
        typeof msg.mode === "string" && MODES.includes(msg.mode)
      ) {
        return {
          type: "state",
          hand: msg.hand as Hand,
          mode: msg.mode as Mode,
          margin: typeof msg.margin === "number" ? msg.margin : 0,
          gate: typeof msg.gate === "string" ? (msg.gate as Gate) : null,
          latency_ms: typeof msg.latency_ms === "number" ? msg.latency_ms : null,
          seq: typeof msg.seq === "number" ? msg.seq : 0,
          trials: typeof msg.trials === "number" ? msg.trials : 0,
          dropped_samples:
            typeof msg.dropped_samples === "number" ? msg.dropped_samples : 0,
        };
      }
      return null;
    case "cue":
      return typeof msg.trial === "number" &&
        (msg.label === "move" || msg.label === "rest")
        ? (msg as unknown as CueMsg)
        : null;
    case "trial_result":
      return typeof msg.trial === "number" &&
        typeof msg.cued === "number" &&
        typeof msg.decoded === "number" &&
        typeof msg.correct === "boolean"
        ? (msg as unknown as TrialResultMsg)
        : null;
    case "summary":
      return typeof msg.accuracy === "number" && typeof msg.n_trials === "number"
        ? (msg as unknown as SummaryMsg)
        : null;
    case "error":
      return typeof msg.message === "string" ? (msg as unknown as ErrorMsg) : null;
    default:
      return null;
  }
}

export function encodeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}
