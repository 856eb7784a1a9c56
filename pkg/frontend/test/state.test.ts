import { describe, expect, it } from "vitest";

import { ViewState } from "../src/state.js";

function makeState(): ViewState {
  // 1000 pings, 256 rows, 0.2 m cells -> depth axis 0..51 m
  return new ViewState("s1", 1000, 256, 0.2, 200);
}

describe("ViewState windows", () => {
  it("clamps the ping window to survey bounds", () => {
    const s = makeState();
    s.goToPing(-50);
    expect(s.pingStart).toBe(0);
    s.goToPing(5000);
    expect(s.pingStart).toBe(1000 - s.pingCount);
  });

  it("centers the target ping when possible", () => {
    const s = makeState();
    s.goToPing(500);
    expect(s.pingStart).toBe(400);
  });

  it("never exceeds a short survey", () => {
    const s = new ViewState("s2", 64, 256, 0.2, 512);
    expect(s.pingCount).toBe(64);
    s.panPings(100);
    expect(s.pingStart).toBe(0);
  });
});

describe("pending segments", () => {
  it("accepts disjoint segments and keeps them sorted", () => {
    const s = makeState();
    s.addPendingSegment({ start: 20, end: 22, values: [10, 10.5] });
    s.addPendingSegment({ start: 5, end: 6, values: [9] });
    expect(s.pending.map((p) => p.start)).toEqual([5, 20]);
  });

  it("rejects overlap with a pending segment", () => {
    const s = makeState();
    s.addPendingSegment({ start: 10, end: 14, values: [8, 8, 8, 8] });
    expect(() =>
      s.addPendingSegment({ start: 13, end: 15, values: [8, 8] }),
    ).toThrow(/overlaps/);
    // touching end-to-start is fine ([10,14) then [14,15))
    s.addPendingSegment({ start: 14, end: 15, values: [8] });
  });

  it("rejects out-of-bounds ping ranges", () => {
    const s = makeState();
    expect(() =>
      s.addPendingSegment({ start: 999, end: 1001, values: [8, 8] }),
    ).toThrow(/outside survey/);
    expect(() =>
      s.addPendingSegment({ start: 5, end: 5, values: [] }),
    ).toThrow(/outside survey/);
  });

  it("rejects depths off the axis and length mismatches", () => {
    const s = makeState();
    expect(() =>
      s.addPendingSegment({ start: 0, end: 1, values: [-1] }),
    ).toThrow(/outside axis/);
    expect(() =>
      s.addPendingSegment({ start: 0, end: 1, values: [1e6] }),
    ).toThrow(/outside axis/);
    expect(() =>
      s.addPendingSegment({ start: 0, end: 2, values: [5] }),
    ).toThrow(/length/);
  });
});
