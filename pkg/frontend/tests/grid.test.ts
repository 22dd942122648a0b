// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { renderGrid, renderRing } from "../src/grid.js";
import { renderPanel } from "../src/log.js";
import { initialUiState, reduce } from "../src/state.js";
import type { UiState } from "../src/state.js";
import type { RoomStateWire, ServerMessage } from "../src/wire.js";

function room(overrides: Partial<RoomStateWire> = {}): RoomStateWire {
  const assignment: Record<string, number> = {};
  const playheads: Record<string, number> = {};
  for (let m = 1; m <= 9; m++) {
    assignment[String(m)] = m;
    playheads[String(m)] = 0;
  }
  return { view: { mode: "matrix" }, audio: { mode: "off" }, playheads, assignment, ...overrides };
}

function uiWith(msg: ServerMessage, base?: UiState): UiState {
  return reduce(base ?? initialUiState(), msg);
}

function snapshotMsg(revision: number, state: RoomStateWire): ServerMessage {
  return { kind: "state_snapshot", revision, state };
}

describe("renderGrid", () => {
  let container: HTMLDivElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="grid"></div><div id="ring"></div><div id="panel"></div>';
    container = document.getElementById("grid") as HTMLDivElement;
  });

  it("renders nine labeled tiles in matrix view", () => {
    renderGrid(container, uiWith(snapshotMsg(1, room())));
    const tiles = container.querySelectorAll(".tile");
    expect(tiles).toHaveLength(9);
    expect(tiles[0]?.textContent).toContain("CAM 1");
    expect(container.dataset.view).toBe("matrix");
  });

  it("renders a single enlarged tile when zoomed", () => {
    renderGrid(container, uiWith(snapshotMsg(1, room({ view: { mode: "zoomed", monitor: 5 } }))));
    const tiles = container.querySelectorAll(".tile");
    expect(tiles).toHaveLength(1);
    expect(tiles[0]?.getAttribute("data-monitor")).toBe("5");
    expect(tiles[0]?.classList.contains("tile-large")).toBe(true);
  });

  it("renders two side-by-side tiles in split view", () => {
    renderGrid(container, uiWith(snapshotMsg(1, room({ view: { mode: "split", monitors: [3, 7] } }))));
    const monitors = [...container.querySelectorAll(".tile")].map((t) => t.getAttribute("data-monitor"));
    expect(monitors).toEqual(["3", "7"]);
  });

  it("shows exchanged camera labels after a swap snapshot", () => {
    const swapped = room();
    swapped.assignment["1"] = 9;
    swapped.assignment["9"] = 1;
    renderGrid(container, uiWith(snapshotMsg(2, swapped)));
    const corner = container.querySelector('[data-monitor="1"]');
    expect(corner?.getAttribute("data-camera")).toBe("9");
    expect(corner?.textContent).toContain("CAM 9");
  });

  it("paints the pointing distribution overlay", () => {
    let ui = uiWith(snapshotMsg(1, room()));
    ui = reduce(ui, {
      kind: "distribution_update",
      window_start: 0,
      window_end: 1000,
      probs: { "5": 0.97 },
    });
    renderGrid(container, ui);
    const center = container.querySelector('[data-monitor="5"]');
    expect(center?.getAttribute("data-prob")).toBe("0.97");
    expect(center?.querySelector(".tile-prob")?.textContent).toBe("97%");
  });

  it("shows audio routing and playhead badges", () => {
    const r = room({ audio: { mode: "routed", monitor: 4, device: "headset" } });
    r.playheads["4"] = 75;
    renderGrid(container, uiWith(snapshotMsg(1, r)));
    const tile = container.querySelector('[data-monitor="4"]');
    expect(tile?.querySelector(".tile-audio")?.textContent).toContain("headset");
    expect(tile?.querySelector(".tile-playhead")?.textContent).toBe("01:15");
  });

  it("ignores stale snapshots by revision", () => {
    let ui = uiWith(snapshotMsg(5, room({ view: { mode: "zoomed", monitor: 2 } })));
    renderGrid(container, ui);
    ui = reduce(ui, snapshotMsg(4, room()));
    renderGrid(container, ui);
    expect(container.dataset.view).toBe("zoomed");
    expect(container.dataset.revision).toBe("5");
  });
});

describe("renderRing", () => {
  it("positions, fills, and hides the dwell ring", () => {
    const ring = document.createElement("div");
    renderRing(ring, 0.5, 0.25, 0.75);
    expect(ring.style.display).toBe("block");
    expect(ring.style.left).toBe("25.00%");
    expect(ring.dataset.progress).toBe("0.50");
    renderRing(ring, 0, 0, 0);
    expect(ring.style.display).toBe("none");
  });
});

describe("renderPanel", () => {
  it("shows clarification banner and command log entries", () => {
    const panel = document.createElement("div");
    let ui = uiWith({ kind: "clarification_needed", t_ms: 1, reason: "which monitor?" });
    renderPanel(panel, ui);
    expect(panel.querySelector(".banner-clarification")?.textContent).toContain("which monitor?");

    ui = reduce(ui, {
      kind: "command_issued",
      command: { kind: "swap", monitors: [1, 9], issued_at: 2, confidence: 0.9 },
    });
    renderPanel(panel, ui);
    expect(panel.querySelector(".banner-clarification")).toBeNull();
    expect(panel.querySelector(".command-log li")?.textContent).toContain("swap · monitors 1, 9");
  });

  it("shows a reconnect banner when the connection drops", () => {
    const panel = document.createElement("div");
    const ui = { ...initialUiState(), connection: "closed" as const };
    renderPanel(panel, ui);
    expect(panel.querySelector(".banner-connection")?.textContent).toContain("connection lost");
  });
});
