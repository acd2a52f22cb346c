/**
 * Session socket wrapper: reconnect with backoff, and a hard whitelist
 * on outbound messages — the console can only ever send set_mode,
 * start_protocol, and stop.
 */

import type { ClientMessage } from "./protocol.js";
import { CLIENT_MESSAGE_TYPES, encodeClientMessage } from "./protocol.js";

// structurally compatible with both the DOM WebSocket and the `ws`
// package; `any` keeps the event-handler variance rules out of the way
/* eslint-disable @typescript-eslint/no-explicit-any */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: any) => any) | null;
  onmessage: ((ev: any) => any) | null;
  onclose: ((ev: any) => any) | null;
  onerror: ((ev: any) => any) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface SessionSocketEvents {
  onText(raw: string): void;
  onOpen(): void;
  onLost(): void;
}

export class SessionSocket {
  private ws: SocketLike | null = null;
  private closed = false;
  private retryMs = 500;
  readonly sent: ClientMessage[] = [];

  constructor(
    private url: string,
    private events: SessionSocketEvents,
    private factory: SocketFactory,
    private schedule: (fn: () => void, ms: number) => void =
      (fn, ms) => setTimeout(fn, ms),
  ) {}

  connect(): void {
    if (this.closed) return;
    const ws = this.factory(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.retryMs = 500;
      this.events.onOpen();
    };
    ws.onmessage = (ev) => {
      if (typeof ev.data === "string") this.events.onText(ev.data);
    };
    const lost = () => {
      if (this.ws !== ws) return; // stale handler after reconnect
      this.ws = null;
      this.events.onLost();
      if (!this.closed) {
        this.schedule(() => this.connect(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 8000);
      }
    };
    ws.onclose = lost;
    ws.onerror = () => {
      /* onclose follows; nothing to do */
    };
  }

  get connected(): boolean {
    return this.ws !== null;
  }

  /**
   * Send a whitelisted message. Throws on anything outside the client
   * schema; returns false when disconnected (caller shows a banner).
   */
  send(msg: ClientMessage): boolean {
    if (!(CLIENT_MESSAGE_TYPES as readonly string[]).includes(msg.type)) {
      throw new Error(`message type ${String((msg as { type?: unknown }).type)} is not allowed`);
    }
    if (this.ws === null) return false;
    this.ws.send(encodeClientMessage(msg));
    this.sent.push(msg);
    return true;
  }

  close(): void {
    this.closed = true;
    if (this.ws !== null) this.ws.close();
    this.ws = null;
  }
}
