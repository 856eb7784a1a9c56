import { describe, expect, it } from "vitest";

import {
  DEFAULT_BOUNDS,
  NO_DATA_COLOR,
  NO_DATA_DB,
  colorForDb,
  renderTile,
} from "../src/colormap.js";

describe("colorForDb", () => {
  it("maps the NaN-fill value to the no-data color", () => {
    expect(colorForDb(NO_DATA_DB)).toEqual([...NO_DATA_COLOR]);
    expect(colorForDb(-250)).toEqual([...NO_DATA_COLOR]);
    expect(colorForDb(Number.NaN)).toEqual([...NO_DATA_COLOR]);
  });

  it("clamps to the ramp endpoints", () => {
    expect(colorForDb(DEFAULT_BOUNDS.minDb - 30)).toEqual(
      colorForDb(DEFAULT_BOUNDS.minDb),
    );
    expect(colorForDb(0)).toEqual(colorForDb(DEFAULT_BOUNDS.maxDb));
  });

  it("is monotone-distinct across the range", () => {
    const low = colorForDb(-85);
    const mid = colorForDb(-50);
    const high = colorForDb(-20);
    expect(low).not.toEqual(mid);
    expect(mid).not.toEqual(high);
  });
});

describe("renderTile", () => {
  it("renders a uniform -200 tile as uniform no-data color", () => {
    const tile = new Float32Array(6 * 4).fill(NO_DATA_DB);
    const px = renderTile(tile, 6, 4);
    for (let i = 0; i < px.length; i += 4) {
      expect([px[i], px[i + 1], px[i + 2], px[i + 3]]).toEqual([
        ...NO_DATA_COLOR,
      ]);
    }
  });

  it("is deterministic", () => {
    const tile = new Float32Array([-200, -80, -45, -15, -60, -33]);
    const a = renderTile(tile, 2, 3);
    const b = renderTile(tile, 2, 3);
    expect(Array.from(a)).toEqual(Array.from(b));
  });

  it("maps a -15 dB band to the top-of-scale color", () => {
    const tile = new Float32Array(3 * 2).fill(-90);
    tile[2] = -15;
    tile[3] = -15;
    const px = renderTile(tile, 3, 2);
    const top = colorForDb(DEFAULT_BOUNDS.maxDb);
    expect([px[8], px[9], px[10], px[11]]).toEqual(top);
    expect([px[12], px[13], px[14], px[15]]).toEqual(top);
  });

  it("rejects a payload/header mismatch", () => {
    expect(() => renderTile(new Float32Array(5), 2, 3)).toThrow(/5 samples/);
  });
});
