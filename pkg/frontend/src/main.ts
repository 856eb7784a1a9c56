import { ApiClient } from "./api.js";
import { nextFlag, prevFlag } from "./flags.js";
import { attachKeyboard } from "./keyboard.js";
import { ViewState } from "./state.js";
import { submitPending } from "./corrections.js";
import { Waterfall } from "./waterfall.js";
import type { BottomResponse, FlagsResponse } from "./types.js";

const client = new ApiClient("");

interface App {
  state: ViewState;
  waterfall: Waterfall;
  bottom: BottomResponse;
  flags: FlagsResponse | null;
  drawMode: boolean;
  cursor: number;
}

function statusLine(app: App, extra = ""): string {
  const nFlags = app.flags ? app.flags.flag.filter(Boolean).length : 0;
  return (
    `pings ${app.state.pingStart}-${app.state.pingStart + app.state.pingCount} ` +
    `| flags ${nFlags} | pending ${app.state.pending.length} ` +
    `| seq ${app.state.committedSeq} ${extra}`
  );
}

async function redraw(app: App): Promise<void> {
  const canvas = document.getElementById("waterfall") as HTMLCanvasElement;
  const tile = await client.tiles(
    app.state.surveyId,
    app.state.pingStart,
    app.state.pingCount,
    canvas.clientWidth || app.state.pingCount,
  );
  app.waterfall.drawTile(tile, app.state.colorBounds);
  const { pingStart, pingCount, depthStepM, overlays } = app.state;
  if (overlays.autoBottom) {
    app.waterfall.drawBottomLine(
      app.bottom.bottom_m, pingStart, pingCount, depthStepM, "#8fd0ff");
  }
  if (overlays.correctedBottom) {
    app.waterfall.drawBottomLine(
      app.bottom.corrected_m, pingStart, pingCount, depthStepM, "#7dff9a");
  }
  if (overlays.flags && app.flags) {
    app.waterfall.drawFlags(app.flags.flag, pingStart, pingCount);
  }
  app.waterfall.drawPending(app.state.pending, pingStart, pingCount, depthStepM);
  const el = document.getElementById("status");
  if (el) el.textContent = statusLine(app);
}

function jump(app: App, finder: typeof nextFlag): void {
  if (!app.flags) return;
  const target = finder(app.cursor, app.flags.flag);
  if (target == null) return;
  app.cursor = target;
  app.state.goToPing(target);
  void redraw(app);
}

/** Accept the detector line over the current flagged run as the correction. */
function acceptAutoBottom(app: App): void {
  if (!app.flags) return;
  let end = app.cursor;
  while (end < app.state.cols && app.flags.flag[end]) end++;
  const values: number[] = [];
  for (let j = app.cursor; j < end; j++) {
    const v = app.bottom.bottom_m[j];
    if (v == null) return;
    values.push(v);
  }
  if (values.length === 0) return;
  try {
    app.state.addPendingSegment({ start: app.cursor, end, values });
  } catch {
    return; // overlap with an existing pending segment: keep the first
  }
  void redraw(app);
}

async function submit(app: App): Promise<void> {
  const result = await submitPending(client, app.state, (seg) => {
    for (let j = seg.start; j < seg.end; j++) {
      app.bottom.corrected_m[j] = seg.values[j - seg.start]!;
    }
  });
  if (result.error) {
    app.bottom = await client.bottom(app.state.surveyId);
  }
  void redraw(app);
}

async function boot(): Promise<void> {
  const surveys = await client.listSurveys();
  const first = surveys[0];
  if (!first) throw new Error("service lists no surveys");
  const meta = await client.meta(first.id);
  const state = new ViewState(
    meta.id, meta.cols, meta.rows, meta.depth_step_m);
  state.committedSeq = meta.seq;
  const canvas = document.getElementById("waterfall") as HTMLCanvasElement;
  const app: App = {
    state,
    waterfall: new Waterfall(canvas),
    bottom: await client.bottom(meta.id),
    flags: meta.has_model ? await client.flags(meta.id) : null,
    drawMode: false,
    cursor: -1,
  };
  attachKeyboard(window, {
    nextFlag: () => jump(app, nextFlag),
    prevFlag: () => jump(app, prevFlag),
    panLeft: () => { app.state.panPings(-app.state.pingCount / 2); void redraw(app); },
    panRight: () => { app.state.panPings(app.state.pingCount / 2); void redraw(app); },
    acceptAutoBottom: () => acceptAutoBottom(app),
    toggleDrawMode: () => { app.drawMode = !app.drawMode; },
    submit: () => void submit(app),
    cancelPending: () => { app.state.clearPending(); void redraw(app); },
  });
  await redraw(app);
}

boot().catch((err) => {
  const el = document.getElementById("status");
  if (el) el.textContent = String(err);
});
