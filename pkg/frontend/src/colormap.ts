/** dB -> RGBA mapping for the waterfall. */

export const NO_DATA_DB = -200;

/** Designated "no data" color (dark slate, outside the data ramp). */
export const NO_DATA_COLOR: readonly [number, number, number, number] = [
  24, 24, 32, 255,
];

export interface ColorBounds {
  minDb: number;
  maxDb: number;
}

export const DEFAULT_BOUNDS: ColorBounds = { minDb: -90, maxDb: -15 };

// blue -> cyan -> yellow -> red ramp, interpolated linearly
const RAMP: readonly [number, number, number][] = [
  [10, 20, 90],
  [20, 120, 180],
  [40, 200, 160],
  [230, 220, 60],
  [220, 60, 30],
];

/** Deterministic color for one Sv sample. NO_DATA_DB maps to NO_DATA_COLOR. */
export function colorForDb(
  db: number,
  bounds: ColorBounds = DEFAULT_BOUNDS,
): [number, number, number, number] {
  if (!Number.isFinite(db) || db <= NO_DATA_DB) {
    return [...NO_DATA_COLOR] as [number, number, number, number];
  }
  const t = Math.min(
    1,
    Math.max(0, (db - bounds.minDb) / (bounds.maxDb - bounds.minDb)),
  );
  const x = t * (RAMP.length - 1);
  const i = Math.min(RAMP.length - 2, Math.floor(x));
  const f = x - i;
  const a = RAMP[i]!;
  const b = RAMP[i + 1]!;
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
    255,
  ];
}

/**
 * Render a decoded tile (row-major rows x width) to RGBA pixels.
 * Throws if the payload length does not match the header dimensions.
 */
export function renderTile(
  tile: Float32Array,
  rows: number,
  width: number,
  bounds: ColorBounds = DEFAULT_BOUNDS,
): Uint8ClampedArray {
  if (tile.length !== rows * width) {
    throw new Error(
      `tile payload has ${tile.length} samples, header says ${rows}x${width}`,
    );
  }
  const out = new Uint8ClampedArray(rows * width * 4);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < width; c++) {
      const [red, green, blue, alpha] = colorForDb(tile[r * width + c]!, bounds);
      const o = 4 * (r * width + c);
      out[o] = red;
      out[o + 1] = green;
      out[o + 2] = blue;
      out[o + 3] = alpha;
    }
  }
  return out;
}
