/**
 * Application wiring: socket -> reducer -> render, plus utterance input
 * with history and mouse-dwell pointing on the grid.
 */

import { GatewayClient } from "./client.js";
import { renderGrid, renderRing } from "./grid.js";
import { renderPanel } from "./log.js";
import { attachPointer, DwellTracker } from "./pointer.js";
import { initialUiState, reduce, setConnection } from "./state.js";
import type { UiState } from "./state.js";
import { WS_PATH } from "./wire.js";

function must<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

export function boot(): void {
  const gridEl = must<HTMLDivElement>("grid");
  const ringEl = must<HTMLDivElement>("ring");
  const panelEl = must<HTMLDivElement>("panel");
  const inputEl = must<HTMLInputElement>("utterance");

  let ui: UiState = initialUiState();
  const redraw = () => {
    renderGrid(gridEl, ui);
    renderPanel(panelEl, ui);
  };

  const url = `ws://${location.host}${WS_PATH}`;
  const client = new GatewayClient(url, {
    onMessage: (msg) => {
      ui = reduce(ui, msg, Date.now());
      redraw();
    },
    onStatus: (status) => {
      ui = setConnection(ui, status);
      redraw();
    },
  });
  client.connect();

  const tracker = new DwellTracker({
    emit: (u, v, pressed) => client.sendPointer(u, v, pressed),
    onProgress: (fraction, u, v) => renderRing(ringEl, fraction, u, v),
  });
  attachPointer(gridEl, tracker);

  const history: string[] = [];
  let cursor = -1;
  inputEl.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") {
      const text = inputEl.value.trim();
      if (!text) return; // empty input ignored
      client.sendSpeech(text);
      history.unshift(text);
      cursor = -1;
      inputEl.value = "";
    } else if (ev.key === "ArrowUp") {
      if (cursor + 1 < history.length) {
        cursor += 1;
        inputEl.value = history[cursor] ?? "";
        ev.preventDefault();
      }
    } else if (ev.key === "ArrowDown") {
      cursor = Math.max(-1, cursor - 1);
      inputEl.value = cursor === -1 ? "" : (history[cursor] ?? "");
      ev.preventDefault();
    }
  });

  redraw();
}

if (typeof document !== "undefined" && document.getElementById("grid")) {
  boot();
}
