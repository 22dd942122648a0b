import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { DwellTracker, EMIT_INTERVAL_MS, normalizedPosition } from "../src/pointer.js";

describe("normalizedPosition", () => {
  const rect = { left: 100, top: 50, width: 400, height: 250 };

  it("maps corners and center", () => {
    expect(normalizedPosition(rect, 100, 50)).toEqual({ u: 0, v: 0 });
    expect(normalizedPosition(rect, 500, 300)).toEqual({ u: 1, v: 1 });
    expect(normalizedPosition(rect, 300, 175)).toEqual({ u: 0.5, v: 0.5 });
  });

  it("clamps positions outside the element", () => {
    const { u, v } = normalizedPosition(rect, 0, 1000);
    expect(u).toBe(0);
    expect(v).toBe(1);
  });
});

describe("DwellTracker", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("emits pressed samples at 25 Hz while held", () => {
    const samples: Array<[number, number, boolean]> = [];
    const tracker = new DwellTracker({ emit: (u, v, p) => samples.push([u, v, p]) });
    tracker.press(0.5, 0.5);
    vi.advanceTimersByTime(1000);
    const pressed = samples.filter(([, , p]) => p);
    expect(pressed.length).toBeGreaterThanOrEqual(1000 / EMIT_INTERVAL_MS); // >= 20 Hz floor
    expect(samples.every(([, , p]) => p)).toBe(true);
  });

  it("reports dwell progress up to the full window", () => {
    const progress: number[] = [];
    const tracker = new DwellTracker({ emit: () => {}, onProgress: (f) => progress.push(f) });
    tracker.press(0.2, 0.2);
    vi.advanceTimersByTime(500);
    expect(Math.max(...progress)).toBeLessThan(1);
    vi.advanceTimersByTime(600);
    expect(Math.max(...progress)).toBe(1);
  });

  it("stops emitting and resets the ring on release", () => {
    const samples: Array<[number, number, boolean]> = [];
    const progress: number[] = [];
    const tracker = new DwellTracker({
      emit: (u, v, p) => samples.push([u, v, p]),
      onProgress: (f) => progress.push(f),
    });
    tracker.press(0.4, 0.6);
    vi.advanceTimersByTime(200);
    tracker.release();
    const count = samples.length;
    expect(samples.at(-1)?.[2]).toBe(false); // release sample
    expect(progress.at(-1)).toBe(0);
    vi.advanceTimersByTime(500);
    expect(samples.length).toBe(count); // nothing after release
    expect(tracker.active).toBe(false);
  });

  it("tracks movement while held", () => {
    const samples: Array<[number, number, boolean]> = [];
    const tracker = new DwellTracker({ emit: (u, v, p) => samples.push([u, v, p]) });
    tracker.press(0.1, 0.1);
    tracker.move(0.9, 0.9);
    vi.advanceTimersByTime(EMIT_INTERVAL_MS + 1);
    expect(samples.at(-1)?.slice(0, 2)).toEqual([0.9, 0.9]);
  });
});
