import type { ColorBounds } from "./colormap.js";
import { DEFAULT_BOUNDS } from "./colormap.js";

/** One unsubmitted bottom-line correction over [start, end). */
export interface Segment {
  start: number;
  end: number; // exclusive
  values: number[]; // corrected depth per ping, meters
}

export interface Overlays {
  autoBottom: boolean;
  correctedBottom: boolean;
  flags: boolean;
}

/**
 * Client view state. Windows stay inside survey bounds; pending segments
 * never overlap each other.
 */
export class ViewState {
  pingStart = 0;
  pingCount: number;
  depthStart = 0;
  depthCount: number;
  colorBounds: ColorBounds = { ...DEFAULT_BOUNDS };
  overlays: Overlays = { autoBottom: true, correctedBottom: true, flags: true };
  pending: Segment[] = [];
  committedSeq = 0;

  constructor(
    readonly surveyId: string,
    readonly cols: number,
    readonly rows: number,
    readonly depthStepM: number,
    viewCols = 512,
  ) {
    this.pingCount = Math.min(viewCols, cols);
    this.depthCount = rows;
  }

  get maxDepthM(): number {
    return (this.rows - 1) * this.depthStepM;
  }

  /** Clamp-move the ping window so `ping` is visible (centered if possible). */
  goToPing(ping: number): void {
    const target = Math.round(ping - this.pingCount / 2);
    this.pingStart = Math.min(
      Math.max(0, target),
      Math.max(0, this.cols - this.pingCount),
    );
  }

  panPings(delta: number): void {
    this.goToPing(this.pingStart + this.pingCount / 2 + delta);
  }

  /**
   * Queue a correction segment. Rejects out-of-bounds windows, depth values
   * off the axis, and overlap with an already pending segment.
   */
  addPendingSegment(seg: Segment): void {
    if (seg.end <= seg.start || seg.start < 0 || seg.end > this.cols) {
      throw new Error(`segment [${seg.start}, ${seg.end}) outside survey`);
    }
    if (seg.values.length !== seg.end - seg.start) {
      throw new Error("segment values length != ping range");
    }
    for (const v of seg.values) {
      if (!Number.isFinite(v) || v < 0 || v > this.maxDepthM) {
        throw new Error(`depth ${v} outside axis [0, ${this.maxDepthM}]`);
      }
    }
    for (const other of this.pending) {
      if (seg.start < other.end && other.start < seg.end) {
        throw new Error("segment overlaps a pending correction");
      }
    }
    this.pending.push(seg);
    this.pending.sort((a, b) => a.start - b.start);
  }

  clearPending(): void {
    this.pending = [];
  }
}
