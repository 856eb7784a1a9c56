/**
 * End-to-end round trip against a real service process: load the survey,
 * navigate to the first flag, submit a 10-ping correction, reload, and check
 * the committed overlay matches the server to 1e-6 m. Also checks that a
 * fetched all-no-data tile region renders as the no-data color.
 */
import { spawn, spawnSync } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, decodeTilePayload } from "../src/api.js";
import { NO_DATA_COLOR, renderTile } from "../src/colormap.js";
import { nextFlag } from "../src/flags.js";
import { submitPending } from "../src/corrections.js";
import { ViewState } from "../src/state.js";

const PORT = 8971;
const BASE = `http://127.0.0.1:${PORT}`;

let dir: string;
let server: ChildProcess;
const client = new ApiClient(BASE);

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 120; i++) {
    try {
      await client.listSurveys();
      return;
    } catch {
      await new Promise((r) => setTimeout(r, 500));
    }
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  dir = mkdtempSync(join(tmpdir(), "review-ui-"));
  const fixture = spawnSync(
    "python3",
    [join(__dirname, "fixture.py"), dir],
    { encoding: "utf-8" },
  );
  if (fixture.status !== 0) {
    throw new Error(`fixture failed: ${fixture.stderr}`);
  }
  server = spawn("echoflag", ["serve", "--config", join(dir, "svc.json"), "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForServer();
}, 180_000);

afterAll(() => {
  server?.kill();
  if (dir) rmSync(dir, { recursive: true, force: true });
});

describe("UI round trip", () => {
  it("loads, corrects at the first flag, and survives a reload", async () => {
    const surveys = await client.listSurveys();
    expect(surveys.length).toBe(1);
    const meta = await client.meta(surveys[0]!.id);
    const state = new ViewState(meta.id, meta.cols, meta.rows, meta.depth_step_m);
    state.committedSeq = meta.seq;

    const { flag } = await client.flags(meta.id);
    const first = nextFlag(-1, flag);
    expect(first).not.toBeNull();
    state.goToPing(first!);

    // correct 10 pings starting at the first flag: nudge the auto line up
    const bottom = await client.bottom(meta.id);
    const start = Math.min(first!, meta.cols - 10);
    const values = Array.from({ length: 10 }, (_, i) => {
      const v = bottom.bottom_m[start + i];
      return v == null ? 15.0 : Math.max(0, v - 0.5);
    });
    state.addPendingSegment({ start, end: start + 10, values });

    const committed: number[] = new Array(meta.cols).fill(Number.NaN);
    const res = await submitPending(client, state, (seg) => {
      for (let j = seg.start; j < seg.end; j++) {
        committed[j] = seg.values[j - seg.start]!;
      }
    });
    expect(res.error).toBeUndefined();
    expect(res.seq).toBe(meta.seq + 1);

    // reload from scratch: server state equals the committed overlay
    const reloaded = await client.bottom(meta.id);
    expect(reloaded.seq).toBe(meta.seq + 1);
    for (let j = start; j < start + 10; j++) {
      expect(Math.abs(reloaded.corrected_m[j]! - committed[j]!)).toBeLessThan(1e-6);
    }
    // outside the corrected range nothing moved
    const before = bottom.corrected_m[start - 1];
    if (start > 0 && before != null) {
      expect(reloaded.corrected_m[start - 1]).toBeCloseTo(before, 6);
    }

    // a second submit based on the stale sequence is rejected and rolled back
    const stale = new ViewState(meta.id, meta.cols, meta.rows, meta.depth_step_m);
    stale.committedSeq = meta.seq; // stale on purpose
    stale.addPendingSegment({ start: 0, end: 1, values: [12.0] });
    const conflict = await submitPending(client, stale, () => {
      throw new Error("stale segment must not apply");
    });
    expect(conflict.error).toContain("409");
    expect(stale.committedSeq).toBe(meta.seq + 1); // refreshed
  });

  it("renders fetched no-data cells with the designated color", async () => {
    const surveys = await client.listSurveys();
    const meta = await client.meta(surveys[0]!.id);
    const tile = await client.tiles(meta.id, 0, 64);
    const data = decodeTilePayload(tile.payload);
    expect(data.length).toBe(tile.rows * tile.width);
    const px = renderTile(data, tile.rows, tile.width);

    // the deepest row sits inside the NaN padding (-200 fill) for most pings
    let checked = 0;
    const r = tile.rows - 1;
    for (let c = 0; c < tile.width; c++) {
      if (data[r * tile.width + c] === -200) {
        const o = 4 * (r * tile.width + c);
        expect([px[o], px[o + 1], px[o + 2], px[o + 3]]).toEqual([
          ...NO_DATA_COLOR,
        ]);
        checked++;
      }
    }
    expect(checked).toBeGreaterThan(0);
  });
});
