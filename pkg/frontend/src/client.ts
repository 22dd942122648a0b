/**
 * Reconnecting gateway client.
 *
 * Wraps one WebSocket, parses inbound frames through the wire schema, and
 * re-dials with capped exponential backoff when the connection drops. The
 * socket constructor is injectable so tests can run without a browser.
 */

import { parseServerMessage, pointerEvent, scenarioControl, speechEvent, WireError } from "./wire.js";
import type { ServerMessage } from "./wire.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientHandlers {
  onMessage: (msg: ServerMessage) => void;
  onStatus?: (status: "connecting" | "open" | "closed") => void;
  onParseError?: (error: WireError) => void;
}

const BACKOFF_BASE_MS = 500;
const BACKOFF_MAX_MS = 8000;

export class GatewayClient {
  private socket: SocketLike | null = null;
  private attempts = 0;
  private closed = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: ClientHandlers,
    private readonly factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    this.closed = false;
    this.dial();
  }

  private dial(): void {
    this.handlers.onStatus?.("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.handlers.onStatus?.("open");
    };
    socket.onmessage = (ev) => {
      try {
        this.handlers.onMessage(parseServerMessage(String(ev.data)));
      } catch (err) {
        if (err instanceof WireError) {
          this.handlers.onParseError?.(err);
        } else {
          throw err;
        }
      }
    };
    socket.onclose = () => {
      this.handlers.onStatus?.("closed");
      this.socket = null;
      if (!this.closed) this.scheduleReconnect();
    };
    socket.onerror = () => {
      /* onclose follows and handles the retry */
    };
  }

  private scheduleReconnect(): void {
    const delay = Math.min(BACKOFF_MAX_MS, BACKOFF_BASE_MS * 2 ** this.attempts);
    this.attempts += 1;
    this.reconnectTimer = setTimeout(() => this.dial(), delay);
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.socket?.close();
  }

  private send(frame: string): boolean {
    if (this.socket === null) return false; // dropped while disconnected
    try {
      this.socket.send(frame);
      return true;
    } catch {
      return false;
    }
  }

  sendSpeech(text: string): boolean {
    if (!text.trim()) return false;
    return this.send(speechEvent(text));
  }

  sendPointer(u: number, v: number, pressed: boolean): boolean {
    return this.send(pointerEvent(u, v, pressed));
  }

  sendControl(action: "reset" | "flush" | "advance"): boolean {
    return this.send(scenarioControl(action));
  }
}
