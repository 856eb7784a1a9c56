"""Command-line surface for every pipeline stage.

Each subcommand is a thin shell over a library call; all randomness flows
from explicit --seed arguments so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import bayesopt, bottomline, echogram as eg, harness, learn, synthgen
from .errors import EchoflagError


def _write_kept(kept, dropped, path):
    flags = {}
    for i in kept:
        flags[int(i)] = 1
    for i in dropped:
        flags[int(i)] = 0
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["ping_index", "kept"])
        for i in sorted(flags):
            w.writerow([i, flags[i]])


def _read_kept(path):
    kept, dropped = [], []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            (kept if int(row["kept"]) else dropped).append(int(row["ping_index"]))
    return np.array(kept), np.array(dropped)


def _pool_from_files(echg_path, labels_path):
    e = eg.load(echg_path)
    labels = eg.load_labels(labels_path)
    if len(labels) != e.cols:
        raise EchoflagError(
            f"labels cover {len(labels)} pings, echogram has {e.cols}")
    kept = np.flatnonzero(labels != bottomline.NO_BOTTOM)
    y = (labels[kept] == bottomline.STRONG).astype(np.int64)
    return e, learn.Dataset(e.sv[:, kept].T.astype(np.float64), y, kept)


def _spec_from_args(args):
    if getattr(args, "spec", None):
        with open(args.spec) as f:
            data = json.load(f)
        kind = data.pop("kind")
        return learn.specs.SPEC_KINDS[kind](**data)
    small = bool(getattr(args, "small", False))
    defaults = {
        "rf": learn.RFSpec(n_trees=50 if small else 187),
        "svm": learn.SVMSpec(),
        "ffnn": learn.FFNNSpec(32, 16, 8, 0.2) if small else learn.FFNNSpec(),
        "cnn": learn.CNNSpec(5, 5, 5, 32, 16, 8, 0.2) if small else learn.CNNSpec(),
    }
    return defaults[args.model]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args):
    cfg = synthgen.load_config(args.config) if args.config else synthgen.SurveyConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.cols is not None:
        cfg.cols = args.cols
    e, rec, truth = synthgen.generate(cfg)
    eg.save(e, args.out)
    if args.clean:
        eg.save_bottom_record(rec, args.clean)
    if args.truth:
        with open(args.truth, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["ping_index", "true_bottom_m", "bottom_present",
                        "artifact"])
            for i in range(cfg.cols):
                w.writerow([i, f"{truth.true_bottom_m[i]:.6f}",
                            int(truth.bottom_present[i]),
                            synthgen.TAG_NAMES[truth.artifact_tag[i]]])
    return 0


def cmd_format(args):
    e = eg.load(args.infile)
    trimmed = eg.trim_rows(e, args.trim)
    kept, dropped = eg.filter_no_bottom(trimmed, args.threshold_db)
    filled = eg.replace_nan(trimmed, args.fill_db)
    eg.save(filled, args.out)
    if args.kept:
        _write_kept(kept, dropped, args.kept)
    return 0


def cmd_verify(args):
    e = eg.load(args.infile)
    if np.isnan(e.sv).any():
        raise EchoflagError(f"{args.infile}: NaN cells remain")
    if float(np.min(e.sv)) < eg.NAN_FILL_DB:
        raise EchoflagError(f"{args.infile}: values below {eg.NAN_FILL_DB} dB")
    print(f"{args.infile}: ok ({e.rows}x{e.cols})")
    return 0


def cmd_detect(args):
    e = eg.load(args.infile)
    bottom_m = bottomline.detect_bottom(e)
    clean = (eg.load_bottom_record(args.clean).clean_bottom_m if args.clean
             else np.full(e.cols, np.nan))
    eg.save_bottom_record(eg.BottomRecord(bottom_m, clean), args.out)
    return 0


def cmd_label(args):
    rec = eg.load_bottom_record(args.bottom)
    if args.clean:
        rec = eg.BottomRecord(rec.bottom_m,
                              eg.load_bottom_record(args.clean).clean_bottom_m)
    no_bottom = _read_kept(args.kept)[1] if args.kept else None
    cfg = bottomline.LabelingConfig(threshold_m=args.threshold)
    labels = bottomline.label_pings(rec, cfg, no_bottom=no_bottom)
    eg.save_labels(labels, args.out)
    return 0


def _threshold_builder(e, bottom_rec, kept, seed, val_fraction=0.2):
    """Dataset builder for the sweep: relabels the kept pings at a candidate
    threshold and returns a fixed train/val split."""
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(len(kept))
    n_val = max(1, int(round(val_fraction * len(kept))))
    val_pos, tr_pos = perm[:n_val], perm[n_val:]
    x_raw = e.sv[:, kept].T.astype(np.float64)

    def build(threshold):
        cfg = bottomline.LabelingConfig(threshold_m=threshold)
        labels = bottomline.label_pings(bottom_rec, cfg)[kept]
        y = (labels == bottomline.STRONG).astype(np.int64)
        xs, stats = eg.standardize(x_raw[tr_pos])
        xv, _ = eg.standardize(x_raw[val_pos], stats)
        return (learn.Dataset(xs, y[tr_pos], kept[tr_pos]),
                learn.Dataset(xv, y[val_pos], kept[val_pos]))

    return build


def cmd_sweep(args):
    e = eg.load(args.echg)
    rec = eg.load_bottom_record(args.bottom)
    kept = (_read_kept(args.kept)[0] if args.kept
            else np.arange(e.cols))
    cfg = bottomline.LabelingConfig(
        sweep=bottomline.SweepRange(args.lo, args.hi, args.step))
    builder = _threshold_builder(e, rec, kept, args.seed)
    spec = _spec_from_args(args)
    table = bottomline.sweep_thresholds(builder, spec, cfg, seed=args.seed,
                                        epochs=args.epochs)
    bottomline.save_sweep_table(table, args.out)
    best = bottomline.select_threshold(builder, spec, cfg, seed=args.seed,
                                       epochs=args.epochs)
    print(f"best_threshold {best:.2f}")
    return 0


def cmd_train(args):
    e, pool = _pool_from_files(args.echg, args.labels)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    perm = rng.permutation(len(pool))
    n_val = int(round(args.val_fraction * len(pool)))
    val_raw = pool.subset(perm[:n_val]) if n_val else None
    tr_raw = pool.subset(perm[n_val:])
    if val_raw is not None:
        (tr, val), stats = harness.standardize_for_training(tr_raw, val_raw)
    else:
        (tr,), stats = harness.standardize_for_training(tr_raw)
        val = None
    spec = _spec_from_args(args)
    cfg = learn.TrainConfig(epochs=args.epochs, seed=args.seed,
                            batch_size=args.batch_size)
    model = learn.train(spec, tr, val=val, cfg=cfg, stats=stats)
    if args.stats:
        stats.save(args.stats)
    import os

    stats_ref = os.path.basename(args.stats) if args.stats else ""
    learn.save_model(model, args.out, stats_ref=stats_ref)
    if args.history:
        learn.save_history(model.history, args.history)
    if val is not None:
        print(f"val_accuracy {learn.accuracy(model, val):.4f}")
    return 0


def cmd_tune(args):
    _, pool = _pool_from_files(args.echg, args.labels)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    perm = rng.permutation(len(pool))
    n_val = max(1, int(round(0.2 * len(pool))))
    val_raw, tr_raw = pool.subset(perm[:n_val]), pool.subset(perm[n_val:])
    (tr, val), _ = harness.standardize_for_training(tr_raw, val_raw)
    space = bayesopt.MODEL_SPACES[args.model]
    kind = args.model

    def objective(params):
        spec = learn.specs.SPEC_KINDS[kind](**params)
        cfg = learn.TrainConfig(epochs=args.epochs, seed=args.seed)
        model = learn.train(spec, tr, val=val, cfg=cfg)
        if model.is_network:
            vals = [h["val_acc"] for h in model.history if np.isfinite(h["val_acc"])]
            return max(vals) if vals else learn.accuracy(model, val)
        return learn.accuracy(model, val)

    best, history = bayesopt.optimize(objective, space, max_iter=args.iters,
                                      seed=args.seed)
    with open(args.out, "w") as f:
        json.dump({"kind": kind, **best}, f, indent=2, sort_keys=True)
    if args.history:
        bayesopt.save_bo_history(history, space, args.history)
    print(f"best {json.dumps(best, sort_keys=True)}")
    return 0


def cmd_experiment(args):
    cfg = learn.TrainConfig(epochs=args.epochs, batch_size=args.batch_size)
    if args.mode == "scaling":
        _, pool = _pool_from_files(args.echg, args.labels)
        algos = [_spec_from_args(argparse.Namespace(model=k, small=args.small,
                                                    spec=None))
                 for k in args.algos.split(",")]
        sizes = [int(s) for s in args.sizes.split(",")]
        report = harness.run_scaling(pool, algos, sizes, repeats=args.repeats,
                                     cfg=cfg, master_seed=args.seed)
    else:
        ea, pool_a = _pool_from_files(args.echg_a, args.labels_a)
        eb, pool_b = _pool_from_files(args.echg_b, args.labels_b)
        labels_a = eg.load_labels(args.labels_a)
        labels_b = eg.load_labels(args.labels_b)
        sa = harness.PreparedSurvey(ea, None, labels_a,
                                    pool_a.ids, None)
        sb = harness.PreparedSurvey(eb, None, labels_b,
                                    pool_b.ids, None)
        st_sizes = tuple(int(s) for s in args.st_sizes.split(","))
        plan = harness.SamplingPlan(st_sizes=st_sizes, cdt_base=args.cdt_base,
                                    cdt_foreign=args.cdt_foreign,
                                    foreign_chunk=args.chunk, seed=args.seed)
        bundle = harness.build_datasets(plan, sa, sb)
        spec = _spec_from_args(args)
        report = harness.run_cross_domain(bundle, spec, cfg=cfg,
                                          repeats=args.repeats,
                                          master_seed=args.seed)
    report.save(f"{args.out_prefix}_records.csv",
                f"{args.out_prefix}_summary.json")
    for rec in report.records:
        if "history" in rec and rec["history"]:
            name = f"{args.out_prefix}_curve_{rec.get('run', 'run')}" \
                   f"_{rec.get('size', 0)}_{rec.get('repeat', 0)}.csv"
            learn.save_history(rec["history"], name)
    return 0


def cmd_flag(args):
    model = learn.load_model(args.model)
    e = eg.load(args.echg)
    stats = eg.StandardizationStats.load(args.stats) if args.stats else None
    prob, flag = harness.flag_pings(model, e, stats=stats,
                                    threshold=args.threshold)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["ping_index", "probability_strong", "flag"])
        for i, (p, fl) in enumerate(zip(prob, flag)):
            w.writerow([i, repr(float(p)), int(fl)])
    return 0


def cmd_serve(args):
    from .service import serve

    serve(args.config, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="echoflag")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic survey")
    g.add_argument("--config")
    g.add_argument("--seed", type=int)
    g.add_argument("--cols", type=int)
    g.add_argument("--out", required=True)
    g.add_argument("--clean", help="expert clean-bottom CSV output")
    g.add_argument("--truth", help="generator ground-truth CSV output")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("format", help="trim, filter, and NaN-fill")
    f.add_argument("--in", dest="infile", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--trim", type=int, default=harness.DEFAULT_TRIM_ROWS)
    f.add_argument("--threshold-db", type=float, default=eg.NO_BOTTOM_THRESHOLD_DB)
    f.add_argument("--fill-db", type=float, default=eg.NAN_FILL_DB)
    f.add_argument("--kept", help="kept/dropped ping CSV output")
    f.set_defaults(func=cmd_format)

    v = sub.add_parser("verify", help="assert a formatted echogram is clean")
    v.add_argument("--in", dest="infile", required=True)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("detect", help="max-gradient bottom detection")
    d.add_argument("--in", dest="infile", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--clean", help="merge clean bottom from this CSV")
    d.set_defaults(func=cmd_detect)

    l = sub.add_parser("label", help="weak/strong correction labels")
    l.add_argument("--bottom", required=True)
    l.add_argument("--clean")
    l.add_argument("--kept")
    l.add_argument("--threshold", type=float,
                   default=bottomline.DEFAULT_THRESHOLD_M)
    l.add_argument("--out", required=True)
    l.set_defaults(func=cmd_label)

    s = sub.add_parser("sweep", help="label-threshold sweep")
    s.add_argument("--echg", required=True)
    s.add_argument("--bottom", required=True)
    s.add_argument("--kept")
    s.add_argument("--lo", type=float, default=1.00)
    s.add_argument("--hi", type=float, default=5.00)
    s.add_argument("--step", type=float, default=0.01)
    s.add_argument("--model", default="cnn",
                   choices=("rf", "svm", "ffnn", "cnn"))
    s.add_argument("--small", action="store_true",
                   help="reduced model for desk-scale sweeps")
    s.add_argument("--epochs", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--spec")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    t = sub.add_parser("train", help="train one model")
    t.add_argument("--echg", required=True)
    t.add_argument("--labels", required=True)
    t.add_argument("--model", default="cnn",
                   choices=("rf", "svm", "ffnn", "cnn"))
    t.add_argument("--spec", help="JSON spec file overriding --model defaults")
    t.add_argument("--small", action="store_true")
    t.add_argument("--epochs", type=int, default=20)
    t.add_argument("--batch-size", type=int, default=128)
    t.add_argument("--val-fraction", type=float, default=0.1)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.add_argument("--stats", help="standardization stats CSV output")
    t.add_argument("--history", help="epoch history CSV output")
    t.set_defaults(func=cmd_train)

    u = sub.add_parser("tune", help="Bayesian hyperparameter search")
    u.add_argument("--echg", required=True)
    u.add_argument("--labels", required=True)
    u.add_argument("--model", default="cnn",
                   choices=("rf", "svm", "ffnn", "cnn"))
    u.add_argument("--iters", type=int, default=50)
    u.add_argument("--epochs", type=int, default=10)
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--out", required=True)
    u.add_argument("--history", help="BO history CSV output")
    u.set_defaults(func=cmd_tune)

    x = sub.add_parser("experiment", help="scaling / cross-domain runs")
    x.add_argument("mode", choices=("scaling", "crossdomain"))
    x.add_argument("--echg")
    x.add_argument("--labels")
    x.add_argument("--echg-a")
    x.add_argument("--labels-a")
    x.add_argument("--echg-b")
    x.add_argument("--labels-b")
    x.add_argument("--algos", default="cnn,svm")
    x.add_argument("--sizes", default="2000,4000,8000")
    x.add_argument("--st-sizes", default="1000,3000,5500")
    x.add_argument("--cdt-base", type=int, default=5000)
    x.add_argument("--cdt-foreign", type=int, default=500)
    x.add_argument("--chunk", type=int, default=1000)
    x.add_argument("--model", default="cnn",
                   choices=("rf", "svm", "ffnn", "cnn"))
    x.add_argument("--spec")
    x.add_argument("--small", action="store_true")
    x.add_argument("--repeats", type=int, default=5)
    x.add_argument("--epochs", type=int, default=12)
    x.add_argument("--batch-size", type=int, default=128)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--out-prefix", required=True)
    x.set_defaults(func=cmd_experiment)

    fl = sub.add_parser("flag", help="score pings for expert review")
    fl.add_argument("--model", required=True)
    fl.add_argument("--echg", required=True)
    fl.add_argument("--stats")
    fl.add_argument("--threshold", type=float, default=0.5)
    fl.add_argument("--out", required=True)
    fl.set_defaults(func=cmd_flag)

    sv = sub.add_parser("serve", help="run the review service")
    sv.add_argument("--config", required=True)
    sv.add_argument("--port", type=int)
    sv.set_defaults(func=cmd_serve)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EchoflagError, OSError, ValueError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
