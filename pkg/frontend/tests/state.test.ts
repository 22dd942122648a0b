import { describe, expect, it } from "vitest";

import { COMMAND_LOG_LIMIT, initialUiState, reduce, setConnection } from "../src/state.js";
import type { ServerMessage, StateSnapshot } from "../src/wire.js";

function snapshot(revision: number, view: StateSnapshot["state"]["view"] = { mode: "matrix" }): ServerMessage {
  return {
    kind: "state_snapshot",
    revision,
    state: { view, audio: { mode: "off" }, playheads: {}, assignment: {} },
  };
}

describe("ui state reducer", () => {
  it("applies snapshots with increasing revisions only", () => {
    let ui = initialUiState();
    ui = reduce(ui, snapshot(3, { mode: "zoomed", monitor: 5 }));
    expect(ui.revision).toBe(3);
    const stale = reduce(ui, snapshot(2));
    expect(stale).toBe(ui); // stale snapshot ignored outright
    ui = reduce(ui, snapshot(4));
    expect(ui.revision).toBe(4);
    expect(ui.room?.view.mode).toBe("matrix");
  });

  it("keeps the displayed revision monotone over any message order", () => {
    let ui = initialUiState();
    const seen: number[] = [];
    for (const rev of [1, 5, 3, 7, 2, 9, 9]) {
      ui = reduce(ui, snapshot(rev));
      seen.push(ui.revision);
    }
    const sorted = [...seen].sort((a, b) => a - b);
    expect(seen).toEqual(sorted);
  });

  it("shows a clarification banner until the next command", () => {
    let ui = initialUiState();
    ui = reduce(ui, { kind: "clarification_needed", t_ms: 10, reason: "missing target" });
    expect(ui.clarification).toBe("missing target");
    ui = reduce(ui, {
      kind: "command_issued",
      command: { kind: "zoom_out", issued_at: 20, confidence: 1 },
    });
    expect(ui.clarification).toBeNull();
    expect(ui.commands).toHaveLength(1);
  });

  it("caps the command log", () => {
    let ui = initialUiState();
    for (let i = 0; i < COMMAND_LOG_LIMIT + 10; i++) {
      ui = reduce(ui, {
        kind: "command_issued",
        command: { kind: "zoom_out", issued_at: i, confidence: 1 },
      });
    }
    expect(ui.commands).toHaveLength(COMMAND_LOG_LIMIT);
    expect(ui.commands[0]?.command.issued_at).toBe(COMMAND_LOG_LIMIT + 9);
  });

  it("tracks distribution updates and connection status", () => {
    let ui = initialUiState();
    ui = reduce(ui, {
      kind: "distribution_update",
      window_start: 0,
      window_end: 1000,
      probs: { "5": 0.8, "6": 0.2 },
    });
    expect(ui.distribution["5"]).toBeCloseTo(0.8);
    ui = setConnection(ui, "closed");
    expect(ui.connection).toBe("closed");
  });
});
