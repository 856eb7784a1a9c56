"""Build a small survey + trained model + service config for UI tests.

Usage: python3 fixture.py <outdir>
"""
import json
import sys

import numpy as np

from echoflag import echogram as eg, harness, learn, synthgen


def main(outdir):
    cfg = synthgen.SurveyConfig(cols=400, seed=77)
    raw, rec, truth = synthgen.generate(cfg)
    prepared = harness.prepare_survey(raw, rec, truth)
    (tr,), stats = harness.standardize_for_training(prepared.pool)
    model = learn.train(learn.SVMSpec(), tr,
                        cfg=learn.TrainConfig(epochs=10), stats=stats)

    prob, flag = harness.flag_pings(model, prepared.echogram, stats=stats)
    if not flag.any():
        raise SystemExit("fixture model produced no flags")

    eg.save(prepared.echogram, f"{outdir}/s1.echg")
    eg.save_bottom_record(prepared.bottom, f"{outdir}/s1.bottom.csv")
    learn.save_model(model, f"{outdir}/s1.model.bin")
    stats.save(f"{outdir}/s1.stats.csv")
    with open(f"{outdir}/svc.json", "w") as f:
        json.dump({"surveys": [{
            "id": "s1", "echg": "s1.echg", "bottom": "s1.bottom.csv",
            "model": "s1.model.bin", "stats": "s1.stats.csv",
            "log": "s1.corrections.ndjson",
        }]}, f)
    print("flags", int(flag.sum()), "of", len(flag))


if __name__ == "__main__":
    main(sys.argv[1])
