"""Review service: serves echogram tiles, flags, and bottom lines to the
browser UI and persists expert corrections in an append-only log."""

from __future__ import annotations

import base64
import json
import os
import threading
import time
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import echogram as eg, harness, learn


class Correction(BaseModel):
    based_on_seq: int
    start: int
    end: int  # exclusive
    values: list[float]
    author: str = ""


@dataclass
class SurveyState:
    survey_id: str
    echogram: eg.Echogram
    bottom: eg.BottomRecord | None
    model: learn.TrainedModel | None
    stats: eg.StandardizationStats | None
    log_path: str
    events: list = field(default_factory=list)
    corrected: np.ndarray = None  # current corrected bottom line
    lock: threading.Lock = field(default_factory=threading.Lock)
    _flags: tuple | None = None

    @property
    def seq(self) -> int:
        return self.events[-1]["seq"] if self.events else 0

    def replay(self):
        base = (self.bottom.clean_bottom_m if self.bottom is not None
                else np.full(self.echogram.cols, np.nan))
        self.corrected = base.astype(np.float64).copy()
        for ev in self.events:
            self.corrected[ev["start"]:ev["end"]] = ev["values"]

    def append(self, ev: dict):
        with open(self.log_path, "a") as f:
            f.write(json.dumps(ev, sort_keys=True) + "\n")
            f.flush()
            os.fsync(f.fileno())
        self.events.append(ev)
        self.corrected[ev["start"]:ev["end"]] = ev["values"]

    def flags(self):
        if self._flags is None:
            if self.model is None:
                raise HTTPException(404, "survey has no model attached")
            prob, flag = harness.flag_pings(self.model, self.echogram,
                                           stats=self.stats)
            self._flags = (prob, flag)
        return self._flags


def load_state(config_path: str) -> dict[str, SurveyState]:
    """Config JSON: {"surveys": [{"id", "echg", "bottom", "model", "stats",
    "log"}]}; bottom/model/stats are optional."""
    with open(config_path) as f:
        cfg = json.load(f)
    root = os.path.dirname(os.path.abspath(config_path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(root, p)

    surveys = {}
    for entry in cfg["surveys"]:
        e = eg.load(resolve(entry["echg"]))
        sid = entry.get("id", e.survey_id)
        bottom = (eg.load_bottom_record(resolve(entry["bottom"]))
                  if entry.get("bottom") else None)
        model = (learn.load_model(resolve(entry["model"]))
                 if entry.get("model") else None)
        stats = (eg.StandardizationStats.load(resolve(entry["stats"]))
                 if entry.get("stats") else None)
        log_path = resolve(entry.get("log", f"{sid}.corrections.ndjson"))
        st = SurveyState(sid, e, bottom, model, stats, log_path)
        if os.path.exists(log_path):
            with open(log_path) as f:
                st.events = [json.loads(line) for line in f if line.strip()]
        st.replay()
        surveys[sid] = st
    return surveys


def _maxpool_tile(sv: np.ndarray, width: int) -> np.ndarray:
    """Downsample ping columns to ``width`` by per-row max over ping bins."""
    cols = sv.shape[1]
    if width >= cols:
        return sv
    edges = np.linspace(0, cols, width + 1).astype(int)
    out = np.empty((sv.shape[0], width), dtype=sv.dtype)
    for i in range(width):
        lo, hi = edges[i], max(edges[i + 1], edges[i] + 1)
        out[:, i] = sv[:, lo:hi].max(axis=1)
    return out


def create_app(surveys: dict[str, SurveyState]) -> FastAPI:
    app = FastAPI(title="echoflag review service")

    def get_survey(sid: str) -> SurveyState:
        if sid not in surveys:
            raise HTTPException(404, f"unknown survey {sid!r}")
        return surveys[sid]

    @app.get("/surveys")
    def list_surveys():
        return [{"id": s.survey_id, "rows": s.echogram.rows,
                 "cols": s.echogram.cols} for s in surveys.values()]

    @app.get("/surveys/{sid}/meta")
    def meta(sid: str):
        s = get_survey(sid)
        return {
            "id": s.survey_id,
            "rows": s.echogram.rows,
            "cols": s.echogram.cols,
            "depth_step_m": s.echogram.depth_step_m,
            "depth_origin_m": s.echogram.depth_origin_m,
            "nan_fill_db": eg.NAN_FILL_DB,
            "has_model": s.model is not None,
            "has_bottom": s.bottom is not None,
            "seq": s.seq,
        }

    @app.get("/surveys/{sid}/tiles")
    def tiles(sid: str, start: int = 0, count: int = 256, width: int = 0):
        s = get_survey(sid)
        if start < 0 or start >= s.echogram.cols or count < 1:
            raise HTTPException(422, "tile window outside survey")
        end = min(start + count, s.echogram.cols)
        sv = s.echogram.sv[:, start:end]
        if width and width < sv.shape[1]:
            sv = _maxpool_tile(sv, width)
        payload = base64.b64encode(
            np.ascontiguousarray(sv, dtype="<f4").tobytes()).decode()
        return {
            "start": start, "count": end - start, "width": sv.shape[1],
            "rows": s.echogram.rows,
            "depth_step_m": s.echogram.depth_step_m,
            "depth_origin_m": s.echogram.depth_origin_m,
            "payload": payload,
        }

    @app.get("/surveys/{sid}/flags")
    def flags(sid: str):
        s = get_survey(sid)
        prob, flag = s.flags()
        return {"probability_strong": [float(p) for p in prob],
                "flag": [bool(f) for f in flag]}

    @app.get("/surveys/{sid}/bottom")
    def bottom(sid: str):
        s = get_survey(sid)
        if s.bottom is None:
            raise HTTPException(404, "no bottom record for survey")

        def clean(a):
            return [None if not np.isfinite(v) else float(v) for v in a]

        return {"bottom_m": clean(s.bottom.bottom_m),
                "clean_bottom_m": clean(s.bottom.clean_bottom_m),
                "corrected_m": clean(s.corrected),
                "seq": s.seq}

    @app.post("/surveys/{sid}/corrections")
    def post_correction(sid: str, c: Correction):
        s = get_survey(sid)
        if c.end <= c.start or c.start < 0 or c.end > s.echogram.cols:
            raise HTTPException(422, "empty or out-of-range ping range")
        if len(c.values) != c.end - c.start:
            raise HTTPException(422, "values length != range length")
        max_depth = float(s.echogram.depth_axis[-1])
        if not all(np.isfinite(v) and 0.0 <= v <= max_depth for v in c.values):
            raise HTTPException(422, "corrected depths outside the depth axis")
        with s.lock:
            if c.based_on_seq != s.seq:
                raise HTTPException(
                    409, f"stale sequence {c.based_on_seq}, current {s.seq}")
            ev = {"seq": s.seq + 1, "start": c.start, "end": c.end,
                  "values": [float(v) for v in c.values],
                  "author": c.author, "timestamp": int(time.time())}
            s.append(ev)
        return {"seq": ev["seq"]}

    @app.get("/surveys/{sid}/corrections")
    def get_corrections(sid: str, since: int = 0):
        s = get_survey(sid)
        return {"seq": s.seq,
                "events": [ev for ev in s.events if ev["seq"] > since]}

    return app


def serve(config_path: str, port: int | None = None, host: str = "127.0.0.1"):
    import uvicorn

    port = port or int(os.environ.get("ECHOFLAG_PORT", "8787"))
    app = create_app(load_state(config_path))
    uvicorn.run(app, host=host, port=port, log_level="warning")
