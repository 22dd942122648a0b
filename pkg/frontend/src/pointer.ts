/**
 * Mouse-dwell pointing: the UI analog of arm pointing.
 *
 * While the primary button is held over the grid, normalized (u, v)
 * pointer events stream to the gateway at 25 Hz; a progress ring shows
 * how much of the 1-second recognition window has filled. A quick click
 * never fills the window, mirroring the gesture path.
 */

export const EMIT_INTERVAL_MS = 40; // 25 Hz, above the 20 Hz floor
export const DWELL_WINDOW_MS = 1000;

export interface RectLike {
  left: number;
  top: number;
  width: number;
  height: number;
}

/** Clamped normalized coordinates; (0,0) is the grid's top-left corner. */
export function normalizedPosition(rect: RectLike, clientX: number, clientY: number): { u: number; v: number } {
  const u = (clientX - rect.left) / rect.width;
  const v = (clientY - rect.top) / rect.height;
  return { u: Math.min(1, Math.max(0, u)), v: Math.min(1, Math.max(0, v)) };
}

export interface PointerHandlers {
  emit: (u: number, v: number, pressed: boolean) => void;
  onProgress?: (fraction: number, u: number, v: number) => void;
}

export class DwellTracker {
  private timer: ReturnType<typeof setInterval> | null = null;
  private heldSince = 0;
  private u = 0;
  private v = 0;

  constructor(
    private readonly handlers: PointerHandlers,
    private readonly now: () => number = () => Date.now(),
  ) {}

  get active(): boolean {
    return this.timer !== null;
  }

  press(u: number, v: number): void {
    if (this.timer !== null) return;
    this.u = u;
    this.v = v;
    this.heldSince = this.now();
    this.emitSample();
    this.timer = setInterval(() => this.emitSample(), EMIT_INTERVAL_MS);
  }

  move(u: number, v: number): void {
    this.u = u;
    this.v = v;
  }

  release(): void {
    if (this.timer === null) return;
    clearInterval(this.timer);
    this.timer = null;
    this.handlers.emit(this.u, this.v, false);
    this.handlers.onProgress?.(0, this.u, this.v);
  }

  private emitSample(): void {
    this.handlers.emit(this.u, this.v, true);
    const held = this.now() - this.heldSince;
    this.handlers.onProgress?.(Math.min(1, held / DWELL_WINDOW_MS), this.u, this.v);
  }
}

/** Wire a tracker to a grid element's mouse events; returns a detach hook. */
export function attachPointer(el: HTMLElement, tracker: DwellTracker): () => void {
  const pos = (ev: MouseEvent) => normalizedPosition(el.getBoundingClientRect(), ev.clientX, ev.clientY);

  const down = (ev: MouseEvent) => {
    if (ev.button !== 0) return;
    const { u, v } = pos(ev);
    tracker.press(u, v);
  };
  const move = (ev: MouseEvent) => {
    if (!tracker.active) return;
    const { u, v } = pos(ev);
    tracker.move(u, v);
  };
  const up = () => tracker.release();

  el.addEventListener("mousedown", down);
  el.addEventListener("mousemove", move);
  window.addEventListener("mouseup", up);
  el.addEventListener("mouseleave", up);
  return () => {
    el.removeEventListener("mousedown", down);
    el.removeEventListener("mousemove", move);
    window.removeEventListener("mouseup", up);
    el.removeEventListener("mouseleave", up);
  };
}
