/**
 * Client-side view state: a pure reducer over server messages.
 *
 * The server is the single source of truth; the grid always reflects the
 * highest snapshot revision received and nothing here mutates room state
 * locally. Stale snapshots (revision <= current) are dropped.
 */

import type { CommandWire, RoomStateWire, ServerMessage } from "./wire.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface CommandEntry {
  command: CommandWire;
  rejected?: string;
  receivedAt: number;
}

export interface UiState {
  connection: ConnectionStatus;
  revision: number;
  room: RoomStateWire | null;
  distribution: Record<string, number>;
  commands: CommandEntry[];
  clarification: string | null;
  errors: string[];
}

export const COMMAND_LOG_LIMIT = 50;

export function initialUiState(): UiState {
  return {
    connection: "connecting",
    revision: -1,
    room: null,
    distribution: {},
    commands: [],
    clarification: null,
    errors: [],
  };
}

export function setConnection(state: UiState, connection: ConnectionStatus): UiState {
  return { ...state, connection };
}

export function reduce(state: UiState, msg: ServerMessage, now = 0): UiState {
  switch (msg.kind) {
    case "state_snapshot": {
      if (msg.revision <= state.revision) {
        return state; // stale by revision check
      }
      return { ...state, revision: msg.revision, room: msg.state };
    }
    case "command_issued": {
      const entry: CommandEntry = { command: msg.command, receivedAt: now };
      if (msg.rejected !== undefined) entry.rejected = msg.rejected;
      const commands = [entry, ...state.commands].slice(0, COMMAND_LOG_LIMIT);
      // a completed command clears the pending clarification banner
      return { ...state, commands, clarification: null, distribution: {} };
    }
    case "distribution_update":
      return { ...state, distribution: msg.probs };
    case "clarification_needed":
      return { ...state, clarification: msg.reason };
    case "error": {
      const errors = [msg.message, ...state.errors].slice(0, 10);
      return { ...state, errors };
    }
  }
}
