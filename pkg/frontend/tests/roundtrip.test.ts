// @vitest-environment happy-dom
//
// Live round trip against the real Python gateway: the client pieces
// (wire -> client -> reducer -> grid renderer) drive a headless DOM while
// a spawned server runs the actual pipeline. Mirrors the canonical demo:
// dwell on cell 1, dwell on cell 9, say "swap this monitor with this one",
// and watch the corner feeds trade places.

import { spawn, type ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { fileURLToPath } from "node:url";
import path from "node:path";

import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient, type SocketLike } from "../src/client.js";
import { renderGrid } from "../src/grid.js";
import { initialUiState, reduce, type UiState } from "../src/state.js";
import type { ServerMessage } from "../src/wire.js";

const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");

let server: ChildProcess;
let port: number;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      const found = address.port;
      probe.close(() => resolve(found));
    });
  });
}

function waitForGateway(url: string, attempts = 60): Promise<void> {
  return new Promise((resolve, reject) => {
    const tryOnce = (left: number) => {
      const ws = new WebSocket(url);
      ws.once("open", () => {
        ws.close();
        resolve();
      });
      ws.once("error", () => {
        if (left <= 0) reject(new Error(`gateway never came up at ${url}`));
        else setTimeout(() => tryOnce(left - 1), 250);
      });
    };
    tryOnce(attempts);
  });
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

beforeAll(async () => {
  port = await freePort();
  server = spawn("python3", ["-m", "controlroom.cli", "serve", "--port", String(port)], {
    cwd: REPO_ROOT,
    stdio: ["ignore", "pipe", "pipe"],
  });
  await waitForGateway(`ws://127.0.0.1:${port}/ws`);
});

afterAll(() => {
  server?.kill();
});

interface Harness {
  client: GatewayClient;
  ui: () => UiState;
  grid: HTMLDivElement;
  waitFor: (pred: (ui: UiState) => boolean, timeoutMs?: number) => Promise<UiState>;
  close: () => void;
}

function connectHarness(): Promise<Harness> {
  document.body.innerHTML = '<div id="grid"></div>';
  const grid = document.getElementById("grid") as HTMLDivElement;
  let ui = initialUiState();
  const waiters: Array<{ pred: (ui: UiState) => boolean; resolve: (ui: UiState) => void }> = [];

  const apply = (msg: ServerMessage) => {
    ui = reduce(ui, msg, Date.now());
    renderGrid(grid, ui);
    for (let i = waiters.length - 1; i >= 0; i--) {
      const waiter = waiters[i];
      if (waiter && waiter.pred(ui)) {
        waiters.splice(i, 1);
        waiter.resolve(ui);
      }
    }
  };

  return new Promise((resolve) => {
    const client = new GatewayClient(
      `ws://127.0.0.1:${port}/ws`,
      {
        onMessage: apply,
        onStatus: (status) => {
          if (status === "open") {
            resolve({
              client,
              grid,
              ui: () => ui,
              waitFor: (pred, timeoutMs = 10_000) =>
                new Promise((res, rej) => {
                  if (pred(ui)) {
                    res(ui);
                    return;
                  }
                  const timer = setTimeout(() => rej(new Error("waitFor timed out")), timeoutMs);
                  waiters.push({
                    pred,
                    resolve: (u) => {
                      clearTimeout(timer);
                      res(u);
                    },
                  });
                }),
              close: () => client.close(),
            });
          }
        },
      },
      (url) => new WebSocket(url) as unknown as SocketLike,
    );
    client.connect();
  });
}

/** Hold the pointer on a cell center, streaming samples at 25 Hz. */
async function dwell(h: Harness, u: number, v: number, holdMs: number): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < holdMs) {
    h.client.sendPointer(u, v, true);
    await sleep(40);
  }
  h.client.sendPointer(u, v, false);
}

describe("gateway round trip", () => {
  it("swaps the corner feeds from two dwells and one utterance", async () => {
    const h = await connectHarness();
    try {
      await h.waitFor((ui) => ui.room !== null);
      expect(h.grid.dataset.view).toBe("matrix");

      // dwell on cell 1 (top-left) until the overlay converges
      const dwellDone = dwell(h, 1 / 6, 1 / 6, 1400);
      const converged = h.waitFor((ui) => (ui.distribution["1"] ?? 0) >= 0.95);
      await Promise.all([dwellDone, converged]);

      await sleep(150);
      await dwell(h, 5 / 6, 5 / 6, 1400); // cell 9 (bottom-right)

      const spoke = Date.now();
      h.client.sendSpeech("swap this monitor with this one");
      await h.waitFor(
        (ui) => ui.room !== null && ui.room.assignment["1"] === 9 && ui.room.assignment["9"] === 1,
      );
      const elapsed = Date.now() - spoke;
      expect(elapsed).toBeLessThan(2000);

      // the rendered grid shows the exchanged corner labels
      expect(h.grid.querySelector('[data-monitor="1"]')?.getAttribute("data-camera")).toBe("9");
      expect(h.grid.querySelector('[data-monitor="9"]')?.getAttribute("data-camera")).toBe("1");
      const swap = h.ui().commands.find((c) => c.command.kind === "swap");
      expect(swap?.command.monitors).toEqual([1, 9]);
    } finally {
      h.close();
    }
  });

  it("completes a zoom when the pointing dwell lands inside the grace window", async () => {
    const h = await connectHarness();
    try {
      await h.waitFor((ui) => ui.room !== null);
      h.client.sendSpeech("zoom in on this one");
      await dwell(h, 0.5, 0.5, 1300); // the late gesture the grace window exists for
      await h.waitFor((ui) => ui.room?.view.mode === "zoomed");
      expect(h.ui().room?.view).toEqual({ mode: "zoomed", monitor: 5 });

      h.client.sendSpeech("zoom out");
      await h.waitFor((ui) => ui.room?.view.mode === "matrix");
      expect(h.grid.dataset.view).toBe("matrix");
    } finally {
      h.close();
    }
  });

  it("shows a clarification banner for an unparseable utterance", async () => {
    const h = await connectHarness();
    try {
      await h.waitFor((ui) => ui.room !== null);
      h.client.sendSpeech("xylqq brmpf wibble");
      await h.waitFor((ui) => ui.clarification !== null, 15_000);
      expect(h.ui().clarification).toBeTruthy();
    } finally {
      h.close();
    }
  });
});
