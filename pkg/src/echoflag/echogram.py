"""Echogram data model, binary codec, and the formatting pipeline.

An echogram is a dense (depth cells x pings) matrix of volume backscattering
strength Sv in dB, on a uniform vertical grid.  Formatting consists of
trimming the noisy surface rows, dropping pings without a bottom signature,
filling NaN cells, and per-depth standardization.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadMagic,
    DimensionOverflow,
    EmptyInput,
    MisalignedRecords,
    TrimTooLarge,
    TruncatedPayload,
)

MAGIC = b"ECHG"
VERSION = 1
HEADER = struct.Struct("<4sIIIdd")  # magic, version, rows, cols, step, origin

MAX_CELLS = 1 << 31  # sanity cap on rows*cols

NAN_FILL_DB = -200.0
NO_BOTTOM_THRESHOLD_DB = -32.0
DEFAULT_DEPTH_STEP_M = 0.20


@dataclass
class Echogram:
    """Sv matrix (rows = depth cells, cols = pings) plus its depth grid."""

    sv: np.ndarray  # float32, shape (rows, cols); may contain NaN
    depth_step_m: float = DEFAULT_DEPTH_STEP_M
    depth_origin_m: float = 0.0
    survey_id: str = ""

    def __post_init__(self):
        self.sv = np.ascontiguousarray(self.sv, dtype=np.float32)
        if self.sv.ndim != 2:
            raise DimensionOverflow(f"sv must be 2-D, got shape {self.sv.shape}")
        if self.depth_step_m <= 0:
            raise DimensionOverflow("depth step must be positive")

    @property
    def rows(self) -> int:
        return self.sv.shape[0]

    @property
    def cols(self) -> int:
        return self.sv.shape[1]

    @property
    def depth_axis(self) -> np.ndarray:
        """Depth in meters of each row center (uniform grid)."""
        return self.depth_origin_m + self.depth_step_m * np.arange(self.rows)

    def depth_to_row(self, depth_m) -> np.ndarray:
        """Nearest row index for a depth, clamped to the valid range."""
        r = np.rint((np.asarray(depth_m) - self.depth_origin_m) / self.depth_step_m)
        return np.clip(r, 0, self.rows - 1).astype(np.int64)


@dataclass
class BottomRecord:
    """Per-ping bottom depth: automatic estimate and expert-corrected truth."""

    bottom_m: np.ndarray  # meters; NaN where not yet detected / no bottom
    clean_bottom_m: np.ndarray

    def __post_init__(self):
        self.bottom_m = np.asarray(self.bottom_m, dtype=np.float64)
        self.clean_bottom_m = np.asarray(self.clean_bottom_m, dtype=np.float64)
        if self.bottom_m.shape != self.clean_bottom_m.shape:
            raise MisalignedRecords(
                f"{self.bottom_m.shape} vs {self.clean_bottom_m.shape}"
            )

    def __len__(self) -> int:
        return self.bottom_m.shape[0]


@dataclass
class StandardizationStats:
    """Per-depth-row mean and standard deviation (dB)."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape or self.mean.ndim != 1:
            raise MisalignedRecords("mean/std must be 1-D and aligned")

    def save(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["row", "mean_db", "std_db"])
            for i, (m, s) in enumerate(zip(self.mean, self.std)):
                w.writerow([i, repr(float(m)), repr(float(s))])

    @classmethod
    def load(cls, path) -> "StandardizationStats":
        mean, std = [], []
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                mean.append(float(row["mean_db"]))
                std.append(float(row["std_db"]))
        return cls(np.array(mean), np.array(std))


# ---------------------------------------------------------------------------
# Binary codec (.echg)
# ---------------------------------------------------------------------------

def save(e: Echogram, path) -> None:
    """Write an echogram as magic/header + row-major little-endian f32."""
    with open(path, "wb") as f:
        f.write(
            HEADER.pack(
                MAGIC, VERSION, e.rows, e.cols, e.depth_step_m, e.depth_origin_m
            )
        )
        f.write(e.sv.astype("<f4", copy=False).tobytes())


def load(path) -> Echogram:
    """Read a .echg file; NaN cells are preserved as stored."""
    with open(path, "rb") as f:
        head = f.read(HEADER.size)
        if len(head) < HEADER.size:
            raise TruncatedPayload(f"{path}: header short ({len(head)} bytes)")
        magic, version, rows, cols, step, origin = HEADER.unpack(head)
        if magic != MAGIC or version != VERSION:
            raise BadMagic(f"{path}: magic={magic!r} version={version}")
        if rows == 0 or cols == 0 or rows * cols > MAX_CELLS:
            raise DimensionOverflow(f"{path}: rows={rows} cols={cols}")
        payload = f.read(4 * rows * cols)
        if len(payload) < 4 * rows * cols:
            raise TruncatedPayload(
                f"{path}: expected {rows * cols} floats, got {len(payload) // 4}"
            )
    sv = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    from pathlib import Path

    return Echogram(
        sv.copy(), depth_step_m=step, depth_origin_m=origin,
        survey_id=Path(path).stem,
    )


# ---------------------------------------------------------------------------
# Formatting operations
# ---------------------------------------------------------------------------

def trim_rows(e: Echogram, n_top: int) -> Echogram:
    """Drop the first ``n_top`` rows, keeping physical depths intact.

    The returned depth axis starts at the depth the first surviving row had
    in the input.
    """
    if n_top < 0 or n_top >= e.rows:
        raise TrimTooLarge(f"n_top={n_top} with {e.rows} rows")
    if n_top == 0:
        return replace(e, sv=e.sv.copy())
    return Echogram(
        e.sv[n_top:].copy(),
        depth_step_m=e.depth_step_m,
        depth_origin_m=e.depth_origin_m + n_top * e.depth_step_m,
        survey_id=e.survey_id,
    )


def filter_no_bottom(e: Echogram, threshold_db: float = NO_BOTTOM_THRESHOLD_DB):
    """Partition ping indices by presence of a bottom signature.

    A ping is kept iff at least one cell exceeds ``threshold_db``.  NaN cells
    never count as a bottom signature.  Returns (kept, dropped) index arrays,
    both in ascending order.
    """
    if e.rows == 0 or e.cols == 0:
        raise EmptyInput("empty echogram")
    sv = np.where(np.isnan(e.sv), -np.inf, e.sv)
    has_bottom = (sv > threshold_db).any(axis=0)
    idx = np.arange(e.cols)
    return idx[has_bottom], idx[~has_bottom]


def replace_nan(e: Echogram, fill_db: float = NAN_FILL_DB) -> Echogram:
    """Replace every NaN cell by ``fill_db``; other cells are untouched."""
    sv = e.sv.copy()
    sv[np.isnan(sv)] = np.float32(fill_db)
    return replace(e, sv=sv)


def select_pings(e: Echogram, indices) -> Echogram:
    """Echogram restricted to the given ping columns, order preserved."""
    return replace(e, sv=np.ascontiguousarray(e.sv[:, np.asarray(indices)]))


def standardize(pings: np.ndarray, stats: StandardizationStats | None = None):
    """Per-depth z-score of ping vectors.

    ``pings`` is (n_pings, n_cells).  When ``stats`` is None the mean and
    population standard deviation are computed from ``pings`` themselves;
    rows with zero variance get std = 1 so they map to 0.  Pass training
    stats explicitly for validation/test data to avoid leakage.

    Returns (standardized pings as float64, stats used).
    """
    pings = np.asarray(pings, dtype=np.float64)
    if pings.ndim == 1:
        pings = pings[None, :]
    if pings.size == 0:
        raise EmptyInput("no pings to standardize")
    if stats is None:
        mean = pings.mean(axis=0)
        std = pings.std(axis=0)  # population convention
        std = np.where(std > 0, std, 1.0)
        stats = StandardizationStats(mean, std)
    elif stats.mean.shape[0] != pings.shape[1]:
        raise MisalignedRecords(
            f"stats length {stats.mean.shape[0]} vs ping length {pings.shape[1]}"
        )
    return (pings - stats.mean) / stats.std, stats


# ---------------------------------------------------------------------------
# CSV interfaces
# ---------------------------------------------------------------------------

def save_bottom_record(b: BottomRecord, path) -> None:
    """CSV: ping_index,bottom_m,clean_bottom_m with 6-decimal meters."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["ping_index", "bottom_m", "clean_bottom_m"])
        for i in range(len(b)):
            w.writerow([i, f"{b.bottom_m[i]:.6f}", f"{b.clean_bottom_m[i]:.6f}"])


def load_bottom_record(path) -> BottomRecord:
    bottom, clean = [], []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            bottom.append(float(row["bottom_m"]))
            clean.append(float(row["clean_bottom_m"]))
    return BottomRecord(np.array(bottom), np.array(clean))


LABEL_NAMES = ("no_bottom", "weak", "strong")


def save_labels(labels, path) -> None:
    """CSV: ping_index,label with label in {no_bottom, weak, strong}."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["ping_index", "label"])
        for i, lab in enumerate(labels):
            w.writerow([i, LABEL_NAMES[int(lab)]])


def load_labels(path) -> np.ndarray:
    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out.append(LABEL_NAMES.index(row["label"]))
    return np.array(out, dtype=np.int64)
