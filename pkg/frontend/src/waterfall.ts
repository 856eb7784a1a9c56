import { decodeTilePayload } from "./api.js";
import { renderTile } from "./colormap.js";
import type { ColorBounds } from "./colormap.js";
import type { TileResponse } from "./types.js";
import type { Segment } from "./state.js";

export interface BottomLines {
  auto: (number | null)[];
  corrected: (number | null)[];
}

/**
 * Canvas waterfall: pings on x, depth on y. The tile is already downsampled
 * server-side to the viewport width, so drawing is one putImageData plus
 * vector overlays.
 */
export class Waterfall {
  private readonly ctx: CanvasRenderingContext2D;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
  }

  drawTile(tile: TileResponse, bounds: ColorBounds): void {
    const data = decodeTilePayload(tile.payload);
    let pixels: Uint8ClampedArray;
    try {
      pixels = renderTile(data, tile.rows, tile.width, bounds);
    } catch (err) {
      this.drawError(String(err));
      return;
    }
    this.canvas.width = tile.width;
    this.canvas.height = tile.rows;
    const image = new ImageData(
      pixels as Uint8ClampedArray<ArrayBuffer>, tile.width, tile.rows);
    this.ctx.putImageData(image, 0, 0);
  }

  private drawError(message: string): void {
    this.ctx.fillStyle = "#401015";
    this.ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    this.ctx.fillStyle = "#ffb0b0";
    this.ctx.font = "12px monospace";
    this.ctx.fillText(message, 8, 20);
  }

  /** Overlay one bottom polyline for the visible ping window. */
  drawBottomLine(
    depths: (number | null)[],
    pingStart: number,
    pingCount: number,
    depthStepM: number,
    color: string,
  ): void {
    const xScale = this.canvas.width / pingCount;
    this.ctx.strokeStyle = color;
    this.ctx.lineWidth = 1.5;
    this.ctx.beginPath();
    let pen = false;
    for (let i = 0; i < pingCount; i++) {
      const d = depths[pingStart + i];
      if (d == null) {
        pen = false;
        continue;
      }
      const x = (i + 0.5) * xScale;
      const y = d / depthStepM;
      if (pen) this.ctx.lineTo(x, y);
      else this.ctx.moveTo(x, y);
      pen = true;
    }
    this.ctx.stroke();
  }

  /** Tick marks along the top edge for flagged pings in the window. */
  drawFlags(flags: boolean[], pingStart: number, pingCount: number): void {
    const xScale = this.canvas.width / pingCount;
    this.ctx.fillStyle = "#ff4d4d";
    for (let i = 0; i < pingCount; i++) {
      if (flags[pingStart + i]) {
        this.ctx.fillRect(i * xScale, 0, Math.max(1, xScale), 5);
      }
    }
  }

  /** Pending (dashed) correction segments. */
  drawPending(
    pending: Segment[],
    pingStart: number,
    pingCount: number,
    depthStepM: number,
  ): void {
    const xScale = this.canvas.width / pingCount;
    this.ctx.strokeStyle = "#ffe14d";
    this.ctx.setLineDash([4, 3]);
    for (const seg of pending) {
      this.ctx.beginPath();
      for (let j = seg.start; j < seg.end; j++) {
        const i = j - pingStart;
        if (i < 0 || i >= pingCount) continue;
        const x = (i + 0.5) * xScale;
        const y = seg.values[j - seg.start]! / depthStepM;
        if (j === seg.start) this.ctx.moveTo(x, y);
        else this.ctx.lineTo(x, y);
      }
      this.ctx.stroke();
    }
    this.ctx.setLineDash([]);
  }
}
