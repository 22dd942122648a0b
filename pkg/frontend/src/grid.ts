/**
 * Monitor-wall rendering.
 *
 * Tiles show placeholder camera content (camera id + playhead), never
 * video. Matrix view paints all nine cells with the live pointing
 * probability overlay; zoomed view shows one enlarged tile; split view
 * places the two monitors side by side. Every visible change comes from
 * a server snapshot.
 */

import type { UiState } from "./state.js";
import type { RoomStateWire } from "./wire.js";

export const GRID_ROWS = 3;
export const GRID_COLS = 3;

function formatPlayhead(seconds: number): string {
  const s = Math.max(0, Math.round(seconds));
  const mm = String(Math.floor(s / 60)).padStart(2, "0");
  const ss = String(s % 60).padStart(2, "0");
  return `${mm}:${ss}`;
}

function tile(room: RoomStateWire, monitor: number, prob: number | undefined, large: boolean): HTMLElement {
  const el = document.createElement("div");
  el.className = large ? "tile tile-large" : "tile";
  el.dataset.monitor = String(monitor);
  const camera = room.assignment[String(monitor)];
  el.dataset.camera = String(camera);

  const label = document.createElement("div");
  label.className = "tile-label";
  label.textContent = `CAM ${camera}`;
  el.appendChild(label);

  const playhead = room.playheads[String(monitor)] ?? 0;
  const badge = document.createElement("div");
  badge.className = "tile-playhead";
  badge.textContent = formatPlayhead(playhead);
  el.appendChild(badge);

  if (room.audio.mode === "routed" && room.audio.monitor === monitor) {
    const audio = document.createElement("div");
    audio.className = "tile-audio";
    audio.textContent = `audio: ${room.audio.device}`;
    el.appendChild(audio);
  }

  if (prob !== undefined && prob > 0) {
    el.dataset.prob = prob.toFixed(2);
    const overlay = document.createElement("div");
    overlay.className = "tile-overlay";
    overlay.style.opacity = String(0.15 + 0.55 * prob);
    el.appendChild(overlay);
    const pct = document.createElement("div");
    pct.className = "tile-prob";
    pct.textContent = `${Math.round(prob * 100)}%`;
    el.appendChild(pct);
  }
  return el;
}

export function renderGrid(container: HTMLElement, ui: UiState): void {
  container.textContent = "";
  const room = ui.room;
  if (room === null) {
    const empty = document.createElement("div");
    empty.className = "grid-empty";
    empty.textContent = "waiting for the first snapshot";
    container.appendChild(empty);
    return;
  }
  container.dataset.revision = String(ui.revision);
  container.dataset.view = room.view.mode;

  if (room.view.mode === "zoomed") {
    container.className = "grid grid-zoomed";
    container.appendChild(tile(room, room.view.monitor, undefined, true));
    return;
  }
  if (room.view.mode === "split") {
    container.className = "grid grid-split";
    for (const monitor of room.view.monitors) {
      container.appendChild(tile(room, monitor, undefined, true));
    }
    return;
  }
  container.className = "grid grid-matrix";
  for (let m = 1; m <= GRID_ROWS * GRID_COLS; m++) {
    container.appendChild(tile(room, m, ui.distribution[String(m)], false));
  }
}

/** Position and fill the dwell progress ring, hidden at zero progress. */
export function renderRing(ring: HTMLElement, fraction: number, u: number, v: number): void {
  if (fraction <= 0) {
    ring.style.display = "none";
    return;
  }
  ring.style.display = "block";
  ring.style.left = `${(u * 100).toFixed(2)}%`;
  ring.style.top = `${(v * 100).toFixed(2)}%`;
  const degrees = Math.round(360 * Math.min(1, fraction));
  ring.style.background = `conic-gradient(#7fd4ff ${degrees}deg, rgba(127, 212, 255, 0.15) ${degrees}deg)`;
  ring.dataset.progress = fraction.toFixed(2);
}
