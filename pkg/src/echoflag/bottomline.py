"""Max-gradient bottom detection and two-class correction labeling.

The detector picks, per ping, the depth with the largest downward increase
in Sv.  Pings are then labeled by how far the automatic bottom sits from the
expert-corrected one: below the threshold is a weak correction, at or above
it a strong correction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .echogram import NAN_FILL_DB, BottomRecord, Echogram
from .errors import EmptySweep, InvalidConfig, MisalignedRecords

NO_BOTTOM = 0
WEAK = 1
STRONG = 2

DEFAULT_THRESHOLD_M = 3.31


@dataclass
class SweepRange:
    lo: float = 1.00
    hi: float = 5.00
    step: float = 0.01


@dataclass
class LabelingConfig:
    threshold_m: float = DEFAULT_THRESHOLD_M
    sweep: SweepRange = field(default_factory=SweepRange)

    def validate(self):
        if self.threshold_m <= 0:
            raise InvalidConfig(f"threshold_m={self.threshold_m}")
        if self.sweep.lo > self.sweep.hi or self.sweep.step <= 0:
            raise InvalidConfig(f"bad sweep {self.sweep}")


def detect_bottom(e: Echogram) -> np.ndarray:
    """Per-ping bottom depth at the maximum vertical gradient.

    NaN cells are treated as the -200 dB fill.  Ties resolve to the
    shallowest row; overestimating depth is the costly error.
    """
    sv = np.where(np.isnan(e.sv), np.float32(NAN_FILL_DB), e.sv)
    grad = np.diff(sv, axis=0)  # grad[r-1] = sv[r] - sv[r-1]
    rows = 1 + np.argmax(grad, axis=0)  # first occurrence = shallowest
    return e.depth_origin_m + e.depth_step_m * rows.astype(np.float64)


def label_pings(b: BottomRecord, cfg: LabelingConfig | None = None,
                no_bottom: np.ndarray | None = None) -> np.ndarray:
    """Label every ping as NO_BOTTOM, WEAK, or STRONG.

    ``no_bottom`` lists ping indices previously dropped by the bottom filter;
    those are labeled NO_BOTTOM regardless of the recorded depths.  The
    strong boundary is inclusive: |clean - bottom| >= threshold.
    """
    cfg = cfg or LabelingConfig()
    cfg.validate()
    if b.bottom_m.shape != b.clean_bottom_m.shape:
        raise MisalignedRecords("bottom and clean bottom differ in length")
    dist = np.abs(b.clean_bottom_m - b.bottom_m)
    labels = np.where(dist >= cfg.threshold_m, STRONG, WEAK)
    if no_bottom is not None and len(no_bottom):
        labels[np.asarray(no_bottom)] = NO_BOTTOM
    return labels.astype(np.int64)


def sweep_grid(sweep: SweepRange) -> np.ndarray:
    """Candidate thresholds lo, lo+step, ..., hi (inclusive)."""
    n = int(round((sweep.hi - sweep.lo) / sweep.step))
    grid = sweep.lo + sweep.step * np.arange(n + 1)
    grid = grid[grid <= sweep.hi + 1e-12]
    if grid.size == 0:
        raise EmptySweep(f"{sweep}")
    return grid


def sweep_thresholds(dataset_builder, model_spec, cfg: LabelingConfig,
                     seed: int = 0, epochs: int = 1):
    """Accuracy table over the threshold grid.

    ``dataset_builder(threshold)`` must return (train, val) datasets labeled
    at that threshold.  Each candidate trains the same model spec from the
    same seed for ``epochs`` epochs (default one, matching how the operating
    threshold was originally chosen) and records validation accuracy.

    Returns a list of (threshold, accuracy) pairs.
    """
    from .learn import TrainConfig, accuracy, train

    cfg.validate()
    table = []
    for t in sweep_grid(cfg.sweep):
        tr, val = dataset_builder(float(t))
        model = train(model_spec, tr, val=None,
                      cfg=TrainConfig(epochs=epochs, seed=seed))
        table.append((float(t), float(accuracy(model, val))))
    return table


def select_threshold(dataset_builder, model_spec, cfg: LabelingConfig,
                     seed: int = 0, epochs: int = 1) -> float:
    """Threshold with the best one-epoch validation accuracy (ties: lowest)."""
    table = sweep_thresholds(dataset_builder, model_spec, cfg, seed, epochs)
    best_t, best_acc = table[0]
    for t, acc in table[1:]:
        if acc > best_acc:
            best_t, best_acc = t, acc
    return best_t


def save_sweep_table(table, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["threshold", "accuracy"])
        for t, acc in table:
            w.writerow([f"{t:.2f}", repr(acc)])
