"""Experiment orchestration: sampling plans, scaling runs, cross-domain
training, and ping flagging for expert review."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import bottomline, echogram as eg, learn, synthgen
from .echogram import BottomRecord, Echogram, StandardizationStats
from .errors import DimensionMismatch, PoolExhausted

DEFAULT_TRIM_ROWS = 12  # strips the bright near-surface band


# ---------------------------------------------------------------------------
# Survey preparation: the full formatting + detection + labeling pipeline
# ---------------------------------------------------------------------------

@dataclass
class PreparedSurvey:
    """Formatted echogram with detector output and per-ping labels."""

    echogram: Echogram  # trimmed and NaN-filled, all pings
    bottom: BottomRecord  # detector bottom + expert clean bottom
    labels: np.ndarray  # per original ping: NO_BOTTOM / WEAK / STRONG
    kept: np.ndarray  # ping indices with a bottom signature
    truth: synthgen.SurveyTruth | None = None

    @property
    def pool(self) -> learn.Dataset:
        """Unstandardized dataset over the kept pings (strong=1, weak=0)."""
        y = (self.labels[self.kept] == bottomline.STRONG).astype(np.int64)
        x = self.echogram.sv[:, self.kept].T.astype(np.float64)
        return learn.Dataset(x, y, self.kept)


def prepare_survey(raw: Echogram, rec: BottomRecord,
                   truth: synthgen.SurveyTruth | None = None,
                   n_top: int = DEFAULT_TRIM_ROWS,
                   label_cfg: bottomline.LabelingConfig | None = None,
                   ) -> PreparedSurvey:
    """Trim, filter, NaN-fill, detect, and label one survey."""
    trimmed = eg.trim_rows(raw, n_top)
    kept, dropped = eg.filter_no_bottom(trimmed)
    filled = eg.replace_nan(trimmed)
    bottom_m = bottomline.detect_bottom(filled)
    bottom = BottomRecord(bottom_m, rec.clean_bottom_m)
    labels = bottomline.label_pings(bottom, label_cfg, no_bottom=dropped)
    return PreparedSurvey(filled, bottom, labels, kept, truth)


def standardize_for_training(train: learn.Dataset, *others: learn.Dataset):
    """Standardize with stats from the training split only."""
    xs, stats = eg.standardize(train.x)
    out = [learn.Dataset(xs, train.y, train.ids)]
    for o in others:
        xo, _ = eg.standardize(o.x, stats)
        out.append(learn.Dataset(xo, o.y, o.ids))
    return out, stats


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

@dataclass
class SamplingPlan:
    """Desk-scale analogue (factor ~1/100) of the survey sampling scheme."""

    st_sizes: tuple = (1000, 3000, 5500)
    cdt_base: int = 5000
    cdt_foreign: int = 500
    foreign_chunk: int = 1000  # contiguous run from B: validation + mix halves
    train_fraction: float = 0.9
    seed: int = 0

    def validate(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise PoolExhausted(f"train_fraction={self.train_fraction}")
        if self.cdt_foreign >= self.foreign_chunk:
            raise PoolExhausted("foreign chunk must exceed the mix share")


@dataclass
class DatasetBundle:
    """Index-disjoint training/validation/test sets (raw, unstandardized)."""

    st: dict  # size -> Dataset from domain A
    cdt: learn.Dataset  # base from A + foreign mix from B
    val: learn.Dataset  # foreign validation half-chunk from B
    test_a: learn.Dataset
    test_b: learn.Dataset


def _plan_rng(seed, tag):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, tag])))


def build_datasets(plan: SamplingPlan, survey_a: PreparedSurvey,
                   survey_b: PreparedSurvey) -> DatasetBundle:
    """Sample the ST/CDT training sets, validation chunk, and test sets.

    Every ST set and the CDT base are prefixes of one permutation of the A
    pool, so the unseen remainder of A is a valid test set for all of them.
    The foreign chunk is one contiguous run of B pool pings, shuffled and
    split into disjoint validation and mix halves.
    """
    plan.validate()
    pool_a, pool_b = survey_a.pool, survey_b.pool
    need_a = max(max(plan.st_sizes), plan.cdt_base)
    if need_a >= len(pool_a):
        raise PoolExhausted(f"A pool {len(pool_a)} < required {need_a}")
    if plan.foreign_chunk >= len(pool_b):
        raise PoolExhausted(f"B pool {len(pool_b)} < chunk {plan.foreign_chunk}")

    perm_a = _plan_rng(plan.seed, 0).permutation(len(pool_a))
    st = {size: pool_a.subset(perm_a[:size]) for size in plan.st_sizes}
    base = pool_a.subset(perm_a[:plan.cdt_base])
    test_a = pool_a.subset(np.sort(perm_a[need_a:]))

    rng_b = _plan_rng(plan.seed, 1)
    start = int(rng_b.integers(0, len(pool_b) - plan.foreign_chunk + 1))
    chunk = np.arange(start, start + plan.foreign_chunk)
    chunk_perm = chunk[rng_b.permutation(plan.foreign_chunk)]
    mix = pool_b.subset(chunk_perm[:plan.cdt_foreign])
    val = pool_b.subset(chunk_perm[plan.cdt_foreign:])
    outside = np.setdiff1d(np.arange(len(pool_b)), chunk)
    test_b = pool_b.subset(outside)

    cdt = learn.Dataset(
        np.concatenate([base.x, mix.x]),
        np.concatenate([base.y, mix.y]),
        np.concatenate([base.ids, mix.ids]),
    )
    return DatasetBundle(st=st, cdt=cdt, val=val, test_a=test_a, test_b=test_b)


def derive_seed(master: int, *tags) -> int:
    """Stable per-cell seed: hash of (master seed, tags)."""
    text = ":".join([str(master)] + [str(t) for t in tags])
    return int.from_bytes(hashlib.blake2s(text.encode()).digest()[:8], "little")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    records: list = field(default_factory=list)

    def add(self, **rec):
        self.records.append(rec)

    def summary(self) -> dict:
        """Mean/min/max accuracy per (algorithm, run, size) over repeats."""
        groups = {}
        for r in self.records:
            key = (r.get("algorithm", ""), r.get("run", ""), r.get("size", 0))
            groups.setdefault(key, []).append(r)
        out = {}
        for (algo, run, size), recs in sorted(groups.items()):
            entry = {"algorithm": algo, "run": run, "size": size,
                     "repeats": len(recs)}
            for fld in ("test_acc", "test_a_acc", "test_b_acc", "train_acc"):
                vals = [r[fld] for r in recs if fld in r and np.isfinite(r[fld])]
                if vals:
                    entry[f"{fld}_mean"] = float(np.mean(vals))
                    entry[f"{fld}_min"] = float(np.min(vals))
                    entry[f"{fld}_max"] = float(np.max(vals))
            out[f"{algo}|{run}|{size}"] = entry
        return out

    def save(self, csv_path, json_path=None):
        fields = sorted({k for r in self.records for k in r if k != "history"})
        with open(csv_path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=fields, extrasaction="ignore")
            w.writeheader()
            for r in self.records:
                w.writerow({k: r.get(k, "") for k in fields})
        if json_path:
            with open(json_path, "w") as f:
                json.dump(self.summary(), f, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def run_scaling(pool: learn.Dataset, algos, sizes, repeats: int = 5,
                cfg: learn.TrainConfig | None = None, master_seed: int = 0,
                train_fraction: float = 0.9) -> ExperimentReport:
    """Train each algorithm at each dataset size, repeats times.

    One held-out test set (1 - train_fraction of the pool) is shared by every
    size, algorithm, and repeat, so the size trend is measured on a common
    benchmark; training subsets are drawn from the remainder, and repeats
    differ only in their derived training seed.  Networks are scored with MC
    dropout, RF/SVM deterministically.  A failed cell is recorded with its
    error and the run continues.
    """
    cfg = cfg or learn.TrainConfig()
    report = ExperimentReport()
    rng = np.random.Generator(
        np.random.PCG64(derive_seed(master_seed, "scaling-split")))
    perm = rng.permutation(len(pool))
    n_test = max(int(round((1.0 - train_fraction) * len(pool))), 1)
    te_raw = pool.subset(perm[:n_test])
    avail = perm[n_test:]
    for size in sizes:
        n_train = int(round(train_fraction * size))
        if n_train > len(avail):
            raise PoolExhausted(f"pool {len(pool)} < size {size}")
        tr_raw = pool.subset(avail[:n_train])
        (tr, te), stats = standardize_for_training(tr_raw, te_raw)
        for spec in algos:
            for rep in range(repeats):
                seed = derive_seed(master_seed, spec.kind, size, rep)
                run_cfg = learn.TrainConfig(
                    epochs=cfg.epochs, batch_size=cfg.batch_size,
                    full_batch=cfg.full_batch,
                    learning_rate=cfg.learning_rate,
                    seed=seed, mc_passes=cfg.mc_passes)
                try:
                    model = learn.train(spec, tr, cfg=run_cfg, stats=stats)
                    if model.is_network:
                        test_acc = learn.mc_dropout_accuracy(model, te)
                    else:
                        test_acc = learn.accuracy(model, te)
                    report.add(algorithm=spec.kind, run="scaling", size=size,
                               repeat=rep, seed=seed, test_acc=test_acc,
                               train_acc=learn.accuracy(model, tr),
                               history=model.history)
                except Exception as err:  # recorded, run continues
                    report.add(algorithm=spec.kind, run="scaling", size=size,
                               repeat=rep, seed=seed, error=repr(err))
    return report


CROSS_DOMAIN_RUNS = ("st_small", "st_mid", "st_big", "cdt_big")


def run_cross_domain(bundle: DatasetBundle, cnn_spec, cfg=None,
                     repeats: int = 5, master_seed: int = 0,
                     ) -> ExperimentReport:
    """Simple-training vs cross-domain-training comparison.

    Trains the network on each ST size and on the CDT mix, evaluating every
    model on its training set and on the unseen A and B test sets.
    """
    cfg = cfg or learn.TrainConfig()
    sizes = sorted(bundle.st)
    runs = {
        "st_small": bundle.st[sizes[0]],
        "st_mid": bundle.st[sizes[1]] if len(sizes) > 1 else bundle.st[sizes[0]],
        "st_big": bundle.st[sizes[-1]],
        "cdt_big": bundle.cdt,
    }
    report = ExperimentReport()
    for name, tr_raw in runs.items():
        (tr, val, te_a, te_b), stats = standardize_for_training(
            tr_raw, bundle.val, bundle.test_a, bundle.test_b)
        for rep in range(repeats):
            seed = derive_seed(master_seed, "crossdomain", name, rep)
            run_cfg = learn.TrainConfig(
                epochs=cfg.epochs, batch_size=cfg.batch_size,
                full_batch=cfg.full_batch, learning_rate=cfg.learning_rate,
                seed=seed, mc_passes=cfg.mc_passes)
            try:
                model = learn.train(cnn_spec, tr, val=val, cfg=run_cfg,
                                    stats=stats)
                if model.is_network:
                    acc = lambda ds: learn.mc_dropout_accuracy(model, ds)
                else:
                    acc = lambda ds: learn.accuracy(model, ds)
                report.add(algorithm=cnn_spec.kind, run=name, size=len(tr),
                           repeat=rep, seed=seed,
                           train_acc=learn.accuracy(model, tr),
                           test_a_acc=acc(te_a), test_b_acc=acc(te_b),
                           history=model.history)
            except Exception as err:
                report.add(algorithm=cnn_spec.kind, run=name, size=len(tr),
                           repeat=rep, seed=seed, error=repr(err))
    return report


# ---------------------------------------------------------------------------
# Flagging
# ---------------------------------------------------------------------------

def flag_pings(model: learn.TrainedModel, e: Echogram,
               stats: StandardizationStats | None = None,
               threshold: float = 0.5, passes: int | None = None):
    """Score every ping and flag likely strong corrections.

    The echogram must already be formatted (trimmed, NaN-filled) so its rows
    match the model input.  Returns (probability array, flag array) ordered
    by ping index.
    """
    stats = stats if stats is not None else model.stats
    if stats is None:
        raise DimensionMismatch("no standardization stats available")
    x, _ = eg.standardize(e.sv.T.astype(np.float64), stats)
    n_in = x.shape[1]
    passes = passes if passes is not None else model.cfg.mc_passes
    if model.is_network:
        if model.model.n_in != n_in:
            raise DimensionMismatch(
                f"model expects {model.model.n_in} cells, echogram has {n_in}")
        prob = np.zeros(e.cols)
        for _ in range(passes):
            prob += learn.predict_proba(model, x, stochastic=True)
        prob /= passes
    else:
        prob = learn.predict_proba(model, x)
    return prob, prob >= threshold
