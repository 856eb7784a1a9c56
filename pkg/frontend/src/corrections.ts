import { ApiClient, ApiError } from "./api.js";
import type { Segment } from "./state.js";
import type { ViewState } from "./state.js";

export interface SubmitResult {
  committed: Segment[];
  rolledBack: Segment[];
  /** server sequence number after the exchange */
  seq: number;
  error?: string;
}

/**
 * Submit pending segments one at a time (at most one in-flight POST).
 *
 * Each acknowledged segment moves from pending to the committed overlay via
 * the caller-supplied `apply`. A 409 (stale sequence) or 422 stops the batch:
 * the failed and remaining segments stay pending and the server sequence is
 * refreshed so the next attempt is based on current state.
 */
export async function submitPending(
  client: ApiClient,
  state: ViewState,
  apply: (seg: Segment) => void,
  author = "",
): Promise<SubmitResult> {
  const committed: Segment[] = [];
  const queue = [...state.pending];
  while (queue.length > 0) {
    const seg = queue[0]!;
    try {
      const ack = await client.submitCorrection(state.surveyId, {
        based_on_seq: state.committedSeq,
        start: seg.start,
        end: seg.end,
        values: seg.values,
        author,
      });
      state.committedSeq = ack.seq;
      apply(seg);
      committed.push(seg);
      queue.shift();
    } catch (err) {
      if (err instanceof ApiError && (err.status === 409 || err.status === 422)) {
        if (err.status === 409) {
          // someone else moved the line; resync before the user retries
          const bottom = await client.bottom(state.surveyId);
          state.committedSeq = bottom.seq;
        }
        state.pending = queue;
        return {
          committed,
          rolledBack: queue,
          seq: state.committedSeq,
          error: `${err.status}: ${err.message}`,
        };
      }
      throw err;
    }
  }
  state.pending = [];
  return { committed, rolledBack: [], seq: state.committedSeq };
}
