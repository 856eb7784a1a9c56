"""Deterministic synthetic echosounder survey generator.

Produces echograms with a known bottom line, an expert-corrected bottom, and
the documented failure modes of max-gradient bottom detection: planktonic
layers hanging over the bottom, constant transducer-offset runs, and soft
(blurred) bottom echoes.  Everything is a pure function of the config seed,
with an independent PCG64 stream per ping so column generation can be
parallelized without changing the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .echogram import BottomRecord, Echogram
from .errors import InvalidConfig

TAG_NONE = 0
TAG_PLANKTON = 1
TAG_OFFSET = 2
TAG_SOFT = 3
TAG_NAMES = ("none", "plankton", "offset", "soft")

STYLE_A = "style_A"
STYLE_B = "style_B"

# NaN padding starts this far below the rendered bottom (desk-scale meters);
# the two styles mimic different onboard recording settings.
NAN_OFFSET_RANGE = {STYLE_A: (5.0, 7.0), STYLE_B: (10.0, 12.0)}

# Label threshold the strong_correction_rate target is calibrated against.
CALIBRATION_THRESHOLD_M = 3.31


@dataclass
class BottomProfile:
    """Mean-reverting random walk controlling the seabed depth per ping."""

    mean_depth_m: float = 24.0
    roughness_m: float = 5.0
    correlation_pings: int = 200


@dataclass
class ArtifactMix:
    """Relative weights of the injected failure modes.

    plankton_layer and transducer_offset produce detector errors large enough
    to need a strong expert correction; soft_bottom_blur only smears the
    bottom edge by a few cells and is applied to this fraction of otherwise
    clean pings.
    """

    plankton_layer: float = 0.85
    transducer_offset: float = 0.15
    soft_bottom_blur: float = 0.05


@dataclass
class SurveyConfig:
    rows: int = 288
    cols: int = 2000
    depth_step_m: float = 0.20
    seed: int = 0
    bottom_profile: BottomProfile = field(default_factory=BottomProfile)
    noise_floor_db: float = -150.0
    noise_sigma_db: float = 4.0
    bottom_peak_db: float = -15.0
    surface_band_rows: int = 8
    surface_band_db: float = -18.0
    strong_correction_rate: float = 0.13
    no_bottom_rate: float = 0.02
    artifact_mix: ArtifactMix = field(default_factory=ArtifactMix)
    nan_style: str = STYLE_A
    expert_cut_m: float = 1.0  # expert cuts this far above a plankton layer top

    def validate(self):
        if self.rows < 16 or self.cols < 1:
            raise InvalidConfig(f"rows={self.rows} cols={self.cols}")
        for name in ("strong_correction_rate", "no_bottom_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name}={v} outside [0,1]")
        if self.strong_correction_rate + self.no_bottom_rate > 1.0:
            raise InvalidConfig("no_bottom_rate + strong_correction_rate > 1")
        if self.nan_style not in NAN_OFFSET_RANGE:
            raise InvalidConfig(f"unknown nan_style {self.nan_style!r}")
        if self.depth_step_m <= 0:
            raise InvalidConfig("depth_step_m must be positive")


@dataclass
class SurveyTruth:
    """Generator ground truth that real surveys never have."""

    true_bottom_m: np.ndarray  # NaN where no bottom in range
    bottom_present: np.ndarray  # bool per ping
    artifact_tag: np.ndarray  # TAG_* per ping


# Shape parameters of the rendered bottom echo: sharp upper edge, slower
# decay below, in dB per (cells/sigma)^2.
BAND_SIGMA_UP = 0.8
BAND_SIGMA_DOWN = 2.0
BAND_SIGMA_UP_SOFT = 2.5
BAND_FALLOFF_DB = 20.0

PLANKTON_BODY_RANGE_DB = (-58.0, -48.0)
PLANKTON_RAMP_CELLS = 10
PLANKTON_GAP_RANGE_M = (1.5, 5.0)
OFFSET_RANGE_M = (3.5, 8.5)
OFFSET_RUN_RANGE = (15, 40)
# Faint residual of the true bottom on most offset pings: the receive window
# still opens for the configured bottom range, so a dim ghost of the real echo
# sits offset_m below the displaced main band when propagation allows.
GHOST_PEAK_DB = -55.0
GHOST_PROB = 1.0
# When the sounder return disagrees with the configured bottom range, the
# logger abandons the survey's tuned retention offset and falls back to a
# wide factory margin before cutting to NaN.
OFFSET_NAN_WINDOW_M = (5.0, 15.0)
# A misconfigured draft shifts the range origin, so ring-down decay bleeds
# further down the recording, in proportion to the offset.
RINGDOWN_TAIL_DB = 10.0        # above the noise floor at the band edge
RINGDOWN_TAIL_ROWS_PER_M = 2.5


def _ping_rng(seed: int, ping: int) -> np.random.Generator:
    # Fixed stream-splitting scheme: one child stream per ping index.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, ping])))


def _stream_rng(seed: int, tag: int) -> np.random.Generator:
    # Survey-level streams (bottom profile, artifact assignment) use negative
    # tags so they can never collide with a ping stream.
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed, (1 << 32) + tag]))
    )


def _bottom_profile(cfg: SurveyConfig) -> np.ndarray:
    """AR(1) depth track with stationary sd = roughness and the configured
    ping-to-ping correlation length."""
    p = cfg.bottom_profile
    rng = _stream_rng(cfg.seed, 0)
    phi = float(np.exp(-1.0 / max(p.correlation_pings, 1)))
    step_sd = p.roughness_m * np.sqrt(1.0 - phi * phi)
    depth = np.empty(cfg.cols)
    x = rng.normal(0.0, p.roughness_m)
    for j in range(cfg.cols):
        depth[j] = p.mean_depth_m + x
        x = phi * x + rng.normal(0.0, step_sd)
    max_depth = (cfg.rows - 1) * cfg.depth_step_m
    return np.clip(depth, 8.0, max_depth - 2.0)


def _strong_passthrough(mix: ArtifactMix) -> float:
    """Expected fraction of injected strong artifacts that the default label
    threshold actually classifies as strong (detector sits one cell above the
    rendered bottom)."""
    g_lo, g_hi = PLANKTON_GAP_RANGE_M
    # plankton: |clean - detected| = gap + expert_cut - 1 cell
    p_pl = np.clip((g_hi - (CALIBRATION_THRESHOLD_M - 1.0 + 0.2)) / (g_hi - g_lo), 0, 1)
    # offset: detector locks onto the displaced bottom echo one cell above
    # its rendered depth, so the miss distance is offset + 1 cell
    o_lo, o_hi = OFFSET_RANGE_M
    p_of = np.clip((o_hi - (CALIBRATION_THRESHOLD_M - 0.2)) / (o_hi - o_lo), 0, 1)
    w = mix.plankton_layer + mix.transducer_offset
    if w <= 0:
        return 1.0
    return (mix.plankton_layer * p_pl + mix.transducer_offset * p_of) / w


def _assign_artifacts(cfg: SurveyConfig, bottom_present: np.ndarray) -> np.ndarray:
    """Per-ping artifact tags; offsets come in contiguous runs."""
    rng = _stream_rng(cfg.seed, 1)
    tags = np.full(cfg.cols, TAG_NONE, dtype=np.int64)
    mix = cfg.artifact_mix
    w_strong = mix.plankton_layer + mix.transducer_offset
    if cfg.strong_correction_rate > 0 and w_strong > 0:
        inject = cfg.strong_correction_rate / max(_strong_passthrough(mix), 1e-9)
        n_strong = int(round(min(inject, 1.0) * cfg.cols))
        n_offset = int(round(n_strong * mix.transducer_offset / w_strong))
        # transducer offsets occur in contiguous ping runs
        placed = 0
        attempts = 0
        while placed < n_offset and attempts < 20 * cfg.cols:
            attempts += 1
            start = int(rng.integers(0, cfg.cols))
            length = int(rng.integers(*OFFSET_RUN_RANGE))
            run = np.arange(start, min(start + length, cfg.cols))
            run = run[bottom_present[run] & (tags[run] == TAG_NONE)]
            tags[run] = TAG_OFFSET
            placed += run.size
        free = np.flatnonzero(bottom_present & (tags == TAG_NONE))
        n_plankton = min(n_strong - placed, free.size)
        if n_plankton > 0:
            tags[rng.choice(free, size=n_plankton, replace=False)] = TAG_PLANKTON
    if mix.soft_bottom_blur > 0:
        free = np.flatnonzero(bottom_present & (tags == TAG_NONE))
        soft = free[rng.random(free.size) < mix.soft_bottom_blur]
        tags[soft] = TAG_SOFT
    return tags


def _offset_values(cfg: SurveyConfig, tags: np.ndarray) -> np.ndarray:
    """One constant offset per contiguous offset run."""
    rng = _stream_rng(cfg.seed, 2)
    offs = np.zeros(cfg.cols)
    j = 0
    while j < cfg.cols:
        if tags[j] == TAG_OFFSET:
            k = j
            while k < cfg.cols and tags[k] == TAG_OFFSET:
                k += 1
            offs[j:k] = rng.uniform(*OFFSET_RANGE_M)
            j = k
        else:
            j += 1
    return offs


def _render_ping(cfg: SurveyConfig, j: int, true_bottom: float, present: bool,
                 tag: int, offset_m: float):
    """One column of Sv plus (clean bottom, rendered bottom).  Returns NaN
    clean bottom for bottomless pings."""
    rng = _ping_rng(cfg.seed, j)
    rows, step = cfg.rows, cfg.depth_step_m
    sv = cfg.noise_floor_db + cfg.noise_sigma_db * rng.standard_normal(rows)

    # transducer ring-down band: pinned to the top rows of the recording, so
    # a transducer-offset ping carries no giveaway there -- only the bottom
    # echo and the NaN padding move down
    s1 = min(cfg.surface_band_rows, rows)
    sv[:s1] = cfg.surface_band_db + 3.0 * rng.standard_normal(s1)

    if tag == TAG_OFFSET:
        # range-origin misalignment: ring-down decay bleeds below the band
        tl = min(int(round(offset_m * RINGDOWN_TAIL_ROWS_PER_M)), rows - s1)
        if tl > 0:
            tail = np.linspace(cfg.noise_floor_db + RINGDOWN_TAIL_DB,
                               cfg.noise_floor_db, tl)
            tail += 2.0 * rng.standard_normal(tl)
            sv[s1:s1 + tl] = np.maximum(sv[s1:s1 + tl], tail)

    if not present:
        return sv.astype(np.float32), np.nan, np.nan

    # a transducer sitting offset_m deeper sees the bottom at a shorter
    # range, so the echo renders shallower than the true line
    rendered_bottom = true_bottom - (offset_m if tag == TAG_OFFSET else 0.0)
    max_depth = (rows - 1) * step
    rendered_bottom = min(max(rendered_bottom, 3.0), max_depth - 1.0)
    b = int(round(rendered_bottom / step))
    clean_bottom = true_bottom

    if tag == TAG_PLANKTON:
        # the expert cut keys on the layer *top*, but the layer floats: its
        # thickness is independent of the top-to-bottom gap, so integrated
        # layer brightness carries no information about the gap
        gap = rng.uniform(*PLANKTON_GAP_RANGE_M)
        gap = min(gap, true_bottom - 4.0)
        top = rendered_bottom - gap
        thick = rng.uniform(0.6, min(2.0, max(gap - 0.3, 0.7)))
        t0 = max(int(round(top / step)), s1)
        b1 = min(int(round((top + thick) / step)), b)
        ramp_end = min(t0 + PLANKTON_RAMP_CELLS, b1)
        body_db = rng.uniform(*PLANKTON_BODY_RANGE_DB)
        ramp = np.linspace(cfg.noise_floor_db + 10.0, body_db,
                           max(ramp_end - t0, 1))
        sv[t0:ramp_end] = np.maximum(sv[t0:ramp_end], ramp[: ramp_end - t0])
        body = body_db + 1.5 * rng.standard_normal(max(b1 - ramp_end, 0))
        sv[ramp_end:b1] = np.clip(body, -62.0, -42.0)
        # soft lower fade so the bottom echo keeps the dominant gradient
        d1 = np.arange(b1, b) - b1
        fade = body_db - BAND_FALLOFF_DB * (d1 / 1.5) ** 2
        sv[b1:b] = np.maximum(sv[b1:b], fade + 1.5 * rng.standard_normal(b - b1))
        clean_bottom = top - cfg.expert_cut_m

    # bottom echo: sharp upper edge, slower tail below
    sig_up = BAND_SIGMA_UP_SOFT if tag == TAG_SOFT else BAND_SIGMA_UP
    d = np.arange(rows) - b
    sigma = np.where(d < 0, sig_up, BAND_SIGMA_DOWN)
    band = cfg.bottom_peak_db - BAND_FALLOFF_DB * (d / sigma) ** 2
    band += 1.0 * rng.standard_normal(rows)
    sv = np.maximum(sv, band)

    if tag == TAG_OFFSET and rng.random() < GHOST_PROB:
        # dim ghost of the true bottom below the displaced main echo
        dg = np.arange(rows) - int(round(true_bottom / step))
        sigma_g = np.where(dg < 0, BAND_SIGMA_UP, BAND_SIGMA_DOWN)
        ghost = GHOST_PEAK_DB - BAND_FALLOFF_DB * (dg / sigma_g) ** 2
        ghost += 1.0 * rng.standard_normal(rows)
        sv = np.maximum(sv, ghost)

    # the logger's data-retention window hangs off its configured bottom
    # estimate, so the padding does not follow a displaced echo
    if tag == TAG_OFFSET:
        nan_start = true_bottom + rng.uniform(*OFFSET_NAN_WINDOW_M)
    else:
        nan_start = true_bottom + rng.uniform(*NAN_OFFSET_RANGE[cfg.nan_style])
    r0 = int(np.ceil(nan_start / step))
    if r0 < rows:
        sv[r0:] = np.nan

    return sv.astype(np.float32), clean_bottom, rendered_bottom


def generate(config: SurveyConfig):
    """Build one synthetic survey.

    Returns (Echogram, BottomRecord, SurveyTruth).  bottom_m in the
    BottomRecord is left as NaN; it is filled later by the detector.
    clean_bottom_m carries the expert-corrected truth.
    """
    config.validate()
    cols = config.cols
    true_bottom = _bottom_profile(config)

    nb_rng = _stream_rng(config.seed, 3)
    bottom_present = nb_rng.random(cols) >= config.no_bottom_rate
    tags = _assign_artifacts(config, bottom_present)
    offsets = _offset_values(config, tags)

    sv = np.empty((config.rows, cols), dtype=np.float32)
    clean = np.full(cols, np.nan)
    for j in range(cols):
        col, cb, _rb = _render_ping(
            config, j, true_bottom[j], bool(bottom_present[j]),
            int(tags[j]), float(offsets[j]),
        )
        sv[:, j] = col
        clean[j] = cb

    truth = SurveyTruth(
        true_bottom_m=np.where(bottom_present, true_bottom, np.nan),
        bottom_present=bottom_present,
        artifact_tag=tags,
    )
    eg = Echogram(sv, depth_step_m=config.depth_step_m,
                  survey_id=f"synth-{config.seed}")
    rec = BottomRecord(bottom_m=np.full(cols, np.nan), clean_bottom_m=clean)
    return eg, rec, truth


def domain_pair_configs(seedA: int, seedB: int, sizeA: int, sizeB: int,
                        base: SurveyConfig | None = None):
    """Configs for a high-correction-rate domain A and a low-rate domain B
    that also differ in their NaN padding style."""
    if sizeA < 1000 or sizeB < 1000:
        raise InvalidConfig("domain surveys need at least 1000 pings")
    base = base or SurveyConfig()
    import copy

    a = copy.deepcopy(base)
    a.seed, a.cols = seedA, sizeA
    a.strong_correction_rate, a.nan_style = 0.13, STYLE_A
    b = copy.deepcopy(base)
    b.seed, b.cols = seedB, sizeB
    b.strong_correction_rate, b.nan_style = 0.01, STYLE_B
    return a, b


def make_domain_pair(seedA: int, seedB: int, sizeA: int, sizeB: int,
                     base: SurveyConfig | None = None):
    """Generate the two-domain survey pair; see domain_pair_configs."""
    a, b = domain_pair_configs(seedA, seedB, sizeA, sizeB, base)
    return generate(a), generate(b)


# ---------------------------------------------------------------------------
# Flat key=value config files for the CLI
# ---------------------------------------------------------------------------

_SCALARS = {
    "rows": int, "cols": int, "depth_step_m": float, "seed": int,
    "noise_floor_db": float, "noise_sigma_db": float, "bottom_peak_db": float,
    "surface_band_rows": int, "surface_band_db": float,
    "strong_correction_rate": float, "no_bottom_rate": float,
    "nan_style": str, "expert_cut_m": float,
}
_PROFILE = {"mean_depth_m": float, "roughness_m": float, "correlation_pings": int}
_MIX = {"plankton_layer": float, "transducer_offset": float,
        "soft_bottom_blur": float}


def load_config(path) -> SurveyConfig:
    """Parse a flat `key = value` file; unknown keys are an error."""
    cfg = SurveyConfig()
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfig(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key in _SCALARS:
                setattr(cfg, key, _SCALARS[key](val))
            elif key.startswith("bottom_profile.") and key[15:] in _PROFILE:
                k = key[15:]
                setattr(cfg.bottom_profile, k, _PROFILE[k](val))
            elif key.startswith("artifact_mix.") and key[13:] in _MIX:
                k = key[13:]
                setattr(cfg.artifact_mix, k, _MIX[k](val))
            else:
                raise InvalidConfig(f"{path}:{lineno}: unknown key {key!r}")
    cfg.validate()
    return cfg


def save_config(cfg: SurveyConfig, path) -> None:
    with open(path, "w") as f:
        for key in _SCALARS:
            f.write(f"{key} = {getattr(cfg, key)}\n")
        for key in _PROFILE:
            f.write(f"bottom_profile.{key} = {getattr(cfg.bottom_profile, key)}\n")
        for key in _MIX:
            f.write(f"artifact_mix.{key} = {getattr(cfg.artifact_mix, key)}\n")
