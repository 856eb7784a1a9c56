/** Flag-run navigation: jump between contiguous flagged ping runs. */

export interface FlagRun {
  start: number;
  end: number; // exclusive
}

export function flagRuns(flags: readonly boolean[]): FlagRun[] {
  const runs: FlagRun[] = [];
  let start = -1;
  for (let i = 0; i < flags.length; i++) {
    if (flags[i] && start < 0) start = i;
    if (!flags[i] && start >= 0) {
      runs.push({ start, end: i });
      start = -1;
    }
  }
  if (start >= 0) runs.push({ start, end: flags.length });
  return runs;
}

/**
 * Start of the next flagged run strictly after `current`; wraps at the end.
 * Returns null when the survey has no flags.
 */
export function nextFlag(
  current: number,
  flags: readonly boolean[],
): number | null {
  const runs = flagRuns(flags);
  if (runs.length === 0) return null;
  for (const run of runs) {
    if (run.start > current) return run.start;
  }
  return runs[0]!.start; // wrap
}

/** Start of the previous flagged run strictly before `current`; wraps. */
export function prevFlag(
  current: number,
  flags: readonly boolean[],
): number | null {
  const runs = flagRuns(flags);
  if (runs.length === 0) return null;
  for (let i = runs.length - 1; i >= 0; i--) {
    if (runs[i]!.start < current) return runs[i]!.start;
  }
  return runs[runs.length - 1]!.start; // wrap
}
