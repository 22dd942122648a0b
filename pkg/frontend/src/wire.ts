/**
 * Wire schema for the gateway WebSocket protocol (version 1).
 *
 * JSON text frames; every message carries kind and protocol_version.
 * This module is the single source of truth for the client side: parsing
 * rejects frames that do not match the schema instead of letting them
 * leak into the UI state.
 */

export const PROTOCOL_VERSION = "1";
export const WS_PATH = "/ws";

export interface ViewMatrix {
  mode: "matrix";
}
export interface ViewZoomed {
  mode: "zoomed";
  monitor: number;
}
export interface ViewSplit {
  mode: "split";
  monitors: [number, number];
}
export type View = ViewMatrix | ViewZoomed | ViewSplit;

export interface AudioOff {
  mode: "off";
}
export interface AudioRouted {
  mode: "routed";
  monitor: number;
  device: string;
}
export type Audio = AudioOff | AudioRouted;

export interface RoomStateWire {
  view: View;
  audio: Audio;
  playheads: Record<string, number>;
  assignment: Record<string, number>;
}

export interface StateSnapshot {
  kind: "state_snapshot";
  revision: number;
  state: RoomStateWire;
}

export interface CommandWire {
  kind: string;
  monitors?: number[];
  device?: string;
  seconds?: number;
  issued_at: number;
  confidence: number;
}

export interface CommandIssued {
  kind: "command_issued";
  command: CommandWire;
  rejected?: string;
}

export interface DistributionUpdate {
  kind: "distribution_update";
  window_start: number;
  window_end: number;
  probs: Record<string, number>;
}

export interface ClarificationNeeded {
  kind: "clarification_needed";
  t_ms: number;
  reason: string;
}

export interface ErrorMessage {
  kind: "error";
  message: string;
}

export type ServerMessage =
  | StateSnapshot
  | CommandIssued
  | DistributionUpdate
  | ClarificationNeeded
  | ErrorMessage;

const SERVER_KINDS = new Set([
  "state_snapshot",
  "command_issued",
  "distribution_update",
  "clarification_needed",
  "error",
]);

export class WireError extends Error {}

export function serialize(kind: string, payload: Record<string, unknown>): string {
  return JSON.stringify({ kind, protocol_version: PROTOCOL_VERSION, ...payload });
}

export function speechEvent(text: string, tMs?: number): string {
  return serialize("speech_event", tMs === undefined ? { text } : { text, t_ms: tMs });
}

export function pointerEvent(u: number, v: number, pressed: boolean, tMs?: number): string {
  const payload: Record<string, unknown> = { u, v, pressed };
  if (tMs !== undefined) payload.t_ms = tMs;
  return serialize("pointer_event", payload);
}

export function scenarioControl(action: "reset" | "flush" | "advance", tMs?: number): string {
  const payload: Record<string, unknown> = { action };
  if (tMs !== undefined) payload.t_ms = tMs;
  return serialize("scenario_control", payload);
}

export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new WireError("frame is not valid JSON");
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new WireError("frame must be a JSON object");
  }
  const msg = data as Record<string, unknown>;
  if (msg.protocol_version !== PROTOCOL_VERSION) {
    throw new WireError(`unsupported protocol_version ${String(msg.protocol_version)}`);
  }
  const kind = msg.kind;
  if (typeof kind !== "string" || !SERVER_KINDS.has(kind)) {
    throw new WireError(`unknown server message kind ${String(kind)}`);
  }
  switch (kind) {
    case "state_snapshot":
      if (typeof msg.revision !== "number" || typeof msg.state !== "object" || msg.state === null) {
        throw new WireError("state_snapshot needs revision and state");
      }
      break;
    case "command_issued":
      if (typeof msg.command !== "object" || msg.command === null) {
        throw new WireError("command_issued needs a command");
      }
      break;
    case "distribution_update":
      if (typeof msg.probs !== "object" || msg.probs === null) {
        throw new WireError("distribution_update needs probs");
      }
      break;
    case "clarification_needed":
      if (typeof msg.reason !== "string") {
        throw new WireError("clarification_needed needs a reason");
      }
      break;
    case "error":
      if (typeof msg.message !== "string") {
        throw new WireError("error needs a message");
      }
      break;
  }
  return msg as unknown as ServerMessage;
}
