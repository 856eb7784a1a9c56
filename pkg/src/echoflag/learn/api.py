"""Shared train / predict / evaluate interface over the four model families."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ..echogram import StandardizationStats
from ..errors import DimensionMismatch, EmptyTestSet, SingleClassDataset
from .dataset import Dataset
from .forest import RandomForest
from .nets import Adam, AlphaDropout, BatchNorm1D, bce_with_logits, build_net, sigmoid
from .specs import CNNSpec, FFNNSpec, ModelSpec, RFSpec, SPEC_KINDS, SVMSpec, TrainConfig
from .svm import LinearSVM


@dataclass
class TrainedModel:
    spec: ModelSpec
    cfg: TrainConfig
    model: object  # Network | RandomForest | LinearSVM
    history: list = field(default_factory=list)  # per-epoch dicts
    stats: StandardizationStats | None = None

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def is_network(self) -> bool:
        return self.kind in ("ffnn", "cnn")


def _epoch_record(epoch, tl, ta, vl, va):
    return {"epoch": epoch, "train_loss": tl, "train_acc": ta,
            "val_loss": vl, "val_acc": va}


def _eval_net(net, x, y):
    net.set_train(False)
    net.set_stochastic(False)
    logits = net.forward(x)
    loss, _ = bce_with_logits(logits, y)
    acc = float(np.mean((logits >= 0) == (y == 1)))
    return float(loss), acc


def _train_net(spec, train: Dataset, val: Dataset | None, cfg: TrainConfig):
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    net = build_net(spec, train.n_cells, rng)
    opt = Adam(net.params(), lr=cfg.learning_rate)
    n = len(train)
    batch = n if cfg.full_batch else min(cfg.batch_size, n)
    history = []
    for epoch in range(cfg.epochs):
        net.set_train(True)
        perm = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        for lo in range(0, n, batch):
            idx = perm[lo:lo + batch]
            xb, yb = train.x[idx], train.y[idx]
            logits = net.forward(xb, rng)
            loss, dlogit = bce_with_logits(logits, yb)
            net.backward(dlogit)
            opt.step(net.grads())
            loss_sum += loss * len(idx)
            correct += int(np.sum((logits >= 0) == (yb == 1)))
        vl, va = _eval_net(net, val.x, val.y) if val is not None else (np.nan, np.nan)
        history.append(
            _epoch_record(epoch, loss_sum / n, correct / n, vl, va)
        )
        net.set_train(True)
    net.set_train(False)
    return net, history


def train(spec: ModelSpec, train_set: Dataset, val: Dataset | None = None,
          cfg: TrainConfig | None = None, stats=None) -> TrainedModel:
    """Fit one model; deterministic given (spec, data, cfg.seed)."""
    cfg = cfg or TrainConfig()
    cfg.validate()
    spec.validate()
    train_set.require_nonempty()
    if val is not None and val.n_cells != train_set.n_cells:
        raise DimensionMismatch("val cell count differs from train")
    if isinstance(spec, (FFNNSpec, CNNSpec)):
        model, history = _train_net(spec, train_set, val, cfg)
    elif isinstance(spec, RFSpec):
        model = RandomForest(spec, seed=cfg.seed).fit(train_set.x, train_set.y)
        history = []
    elif isinstance(spec, SVMSpec):
        model = LinearSVM(spec, seed=cfg.seed, epochs=cfg.epochs)
        model.fit(train_set.x, train_set.y)
        history = []
    else:
        raise TypeError(f"unknown spec {spec!r}")
    tm = TrainedModel(spec=spec, cfg=cfg, model=model, history=history,
                      stats=stats)
    tm._mc_rng = np.random.Generator(np.random.PCG64(cfg.seed + 1))
    return tm


def _mc_rng(m: TrainedModel):
    if not hasattr(m, "_mc_rng") or m._mc_rng is None:
        m._mc_rng = np.random.Generator(np.random.PCG64(m.cfg.seed + 1))
    return m._mc_rng


PREDICT_CHUNK = 512  # keeps the conv im2col buffers cache-sized


def predict_proba(m: TrainedModel, x, stochastic: bool = False,
                  rng=None) -> np.ndarray:
    """P(strong) per ping vector.

    For the networks, stochastic=True keeps dropout active (masks resampled
    each call) while batch norm always uses its running statistics.  RF and
    SVM ignore the flag.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if not m.is_network:
        return m.model.predict_proba(x)
    net = m.model
    if x.shape[1] != net.n_in:
        raise DimensionMismatch(f"expected {net.n_in} cells, got {x.shape[1]}")
    net.set_train(False)
    net.set_stochastic(stochastic)
    rng = rng if rng is not None else _mc_rng(m)
    logits = np.concatenate([
        net.forward(x[lo:lo + PREDICT_CHUNK], rng)
        for lo in range(0, len(x), PREDICT_CHUNK)
    ])
    net.set_stochastic(False)
    return sigmoid(logits)


def accuracy(m: TrainedModel, test: Dataset) -> float:
    """Deterministic accuracy at the 0.5 threshold."""
    if len(test) == 0:
        raise EmptyTestSet("no test pings")
    p = predict_proba(m, test.x, stochastic=False)
    return float(np.mean((p >= 0.5) == (test.y == 1)))


def mc_dropout_accuracy(m: TrainedModel, test: Dataset,
                        passes: int | None = None, rng=None) -> float:
    """Accuracy of the mean probability over stochastic forward passes.

    RF and SVM have no stochastic mode, so this equals plain accuracy.
    """
    if len(test) == 0:
        raise EmptyTestSet("no test pings")
    passes = passes if passes is not None else m.cfg.mc_passes
    if passes < 1:
        raise EmptyTestSet("passes must be >= 1")
    if not m.is_network:
        return accuracy(m, test)
    rng = rng if rng is not None else _mc_rng(m)
    mean_p = np.zeros(len(test))
    for _ in range(passes):
        mean_p += predict_proba(m, test.x, stochastic=True, rng=rng)
    mean_p /= passes
    return float(np.mean((mean_p >= 0.5) == (test.y == 1)))


def grad_check(spec, x, y, seed: int = 0) -> float:
    """Finite-difference check of the network gradients; see nets.grad_check."""
    from .nets import grad_check as _gc

    return _gc(spec, x, y, seed=seed)


# ---------------------------------------------------------------------------
# Persistence: JSON header + little-endian f32 blob
# ---------------------------------------------------------------------------

def _net_state(net):
    vecs = [p.ravel() for p in net.params()]
    for lay in net.layers:
        if isinstance(lay, BatchNorm1D):
            vecs += [lay.running_mean, lay.running_var]
    return np.concatenate(vecs)


def _set_net_state(net, vec):
    i = 0
    for p in net.params():
        p[...] = vec[i:i + p.size].reshape(p.shape)
        i += p.size
    for lay in net.layers:
        if isinstance(lay, BatchNorm1D):
            for arr in (lay.running_mean, lay.running_var):
                arr[...] = vec[i:i + arr.size]
                i += arr.size


def save_model(m: TrainedModel, path, stats_ref: str = "") -> None:
    header = {
        "kind": m.kind,
        "spec": asdict(m.spec),
        "seed": m.cfg.seed,
        "epochs": m.cfg.epochs,
        "mc_passes": m.cfg.mc_passes,
        "stats_ref": stats_ref,
    }
    if m.is_network:
        header["n_in"] = m.model.n_in
        blob = _net_state(m.model).astype("<f4")
    elif m.kind == "svm":
        svm = m.model
        blob = np.concatenate(
            [svm.w, [svm.b, svm.cal_a, svm.cal_b]]
        ).astype("<f4")
        header["n_in"] = int(svm.w.shape[0])
    else:
        forest = m.model
        header["n_in"] = forest.n_features
        header["tree_sizes"] = [len(t.nodes) for t in forest.trees]
        parts = []
        for t in forest.trees:
            for f in ("feature", "threshold", "left", "right", "prob"):
                parts.append(np.asarray(t.nodes[f], dtype="<f4"))
        blob = np.concatenate(parts) if parts else np.zeros(0, dtype="<f4")
    hdr = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(len(hdr).to_bytes(4, "little"))
        f.write(hdr)
        f.write(blob.tobytes())


def load_model(path) -> TrainedModel:
    from .forest import Tree, _NODE_DTYPE

    with open(path, "rb") as f:
        hlen = int.from_bytes(f.read(4), "little")
        header = json.loads(f.read(hlen).decode())
        blob = np.frombuffer(f.read(), dtype="<f4").astype(np.float64)
    spec = SPEC_KINDS[header["kind"]](**header["spec"])
    cfg = TrainConfig(epochs=header["epochs"], seed=header["seed"],
                      mc_passes=header["mc_passes"])
    if header["kind"] in ("ffnn", "cnn"):
        rng = np.random.Generator(np.random.PCG64(cfg.seed))
        net = build_net(spec, header["n_in"], rng)
        _set_net_state(net, blob)
        model = net
    elif header["kind"] == "svm":
        model = LinearSVM(spec, seed=cfg.seed)
        model.w = blob[:-3].copy()
        model.b, model.cal_a, model.cal_b = (float(v) for v in blob[-3:])
    else:
        model = RandomForest(spec, seed=cfg.seed)
        model.n_features = header["n_in"]
        i = 0
        for size in header["tree_sizes"]:
            nodes = np.zeros(size, dtype=_NODE_DTYPE)
            for fname in ("feature", "threshold", "left", "right", "prob"):
                nodes[fname] = blob[i:i + size]
                i += size
            model.trees.append(Tree(nodes.tolist()))
    m = TrainedModel(spec=spec, cfg=cfg, model=model)
    m._mc_rng = np.random.Generator(np.random.PCG64(cfg.seed + 1))
    stats_ref = header.get("stats_ref")
    if stats_ref:
        import os

        cand = os.path.join(os.path.dirname(os.path.abspath(path)), stats_ref)
        if os.path.exists(cand):
            m.stats = StandardizationStats.load(cand)
    return m


def save_history(history, path) -> None:
    """CSV: epoch,train_loss,train_acc,val_loss,val_acc."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "train_loss", "train_acc", "val_loss", "val_acc"])
        for rec in history:
            w.writerow([rec["epoch"], repr(rec["train_loss"]),
                        repr(rec["train_acc"]), repr(rec["val_loss"]),
                        repr(rec["val_acc"])])
