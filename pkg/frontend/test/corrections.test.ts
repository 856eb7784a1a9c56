import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { submitPending } from "../src/corrections.js";
import { ViewState } from "../src/state.js";
import type { Segment } from "../src/state.js";

interface Scripted {
  status: number;
  body: unknown;
}

/** fetch stub: POSTs consume a scripted response list, GET /bottom is fixed. */
function makeClient(posts: Scripted[], bottomSeq = 7): {
  client: ApiClient;
  postCount: () => number;
} {
  let n = 0;
  const impl = (async (url: RequestInfo | URL, init?: RequestInit) => {
    if (init?.method === "POST") {
      const r = posts[n++] ?? { status: 500, body: "unscripted" };
      return new Response(JSON.stringify(r.body), { status: r.status });
    }
    expect(String(url)).toContain("/bottom");
    return new Response(
      JSON.stringify({ bottom_m: [], clean_bottom_m: [], corrected_m: [], seq: bottomSeq }),
      { status: 200 },
    );
  }) as typeof fetch;
  return { client: new ApiClient("http://x", impl), postCount: () => n };
}

function stateWith(segments: Segment[]): ViewState {
  const s = new ViewState("s1", 1000, 256, 0.2);
  for (const seg of segments) s.addPendingSegment(seg);
  return s;
}

describe("submitPending", () => {
  it("sends nothing when no segments are pending", async () => {
    const { client, postCount } = makeClient([]);
    const state = stateWith([]);
    const res = await submitPending(client, state, () => {});
    expect(res.committed).toEqual([]);
    expect(postCount()).toBe(0);
  });

  it("commits acknowledged segments and advances the sequence", async () => {
    const { client } = makeClient([
      { status: 200, body: { seq: 1 } },
      { status: 200, body: { seq: 2 } },
    ]);
    const state = stateWith([
      { start: 0, end: 1, values: [12] },
      { start: 5, end: 7, values: [13, 13.5] },
    ]);
    const applied: Segment[] = [];
    const res = await submitPending(client, state, (s) => applied.push(s));
    expect(res.error).toBeUndefined();
    expect(res.seq).toBe(2);
    expect(applied.length).toBe(2);
    expect(state.pending).toEqual([]);
  });

  it("rolls back on a stale sequence and refreshes from the server", async () => {
    const { client } = makeClient(
      [{ status: 409, body: "stale sequence 0, current 7" }],
      7,
    );
    const state = stateWith([{ start: 0, end: 1, values: [12] }]);
    const res = await submitPending(client, state, () => {
      throw new Error("must not apply a rejected segment");
    });
    expect(res.error).toContain("409");
    expect(res.rolledBack.length).toBe(1);
    expect(state.pending.length).toBe(1); // stays pending for retry
    expect(state.committedSeq).toBe(7); // resynced
  });

  it("stops the batch on 422 and keeps the remainder pending", async () => {
    const { client, postCount } = makeClient([
      { status: 200, body: { seq: 1 } },
      { status: 422, body: "corrected depths outside the depth axis" },
    ]);
    const state = stateWith([
      { start: 0, end: 1, values: [12] },
      { start: 5, end: 6, values: [13] },
      { start: 9, end: 10, values: [14] },
    ]);
    const applied: Segment[] = [];
    const res = await submitPending(client, state, (s) => applied.push(s));
    expect(applied.length).toBe(1);
    expect(res.error).toContain("422");
    expect(state.pending.length).toBe(2);
    expect(postCount()).toBe(2); // batch stopped at the failure
  });
});
