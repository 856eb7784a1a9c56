import base64
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from echoflag import echogram as eg, harness, learn, service, synthgen


@pytest.fixture(scope="module")
def setup(tmp_path_factory):
    """Config dir with one prepared survey, trained model, and stats."""
    d = tmp_path_factory.mktemp("svc")
    cfg = synthgen.SurveyConfig(cols=400, seed=77)
    raw, rec, truth = synthgen.generate(cfg)
    prepared = harness.prepare_survey(raw, rec, truth)
    (tr,), stats = harness.standardize_for_training(prepared.pool)
    model = learn.train(learn.SVMSpec(), tr,
                        cfg=learn.TrainConfig(epochs=5), stats=stats)

    eg.save(prepared.echogram, d / "s1.echg")
    eg.save_bottom_record(prepared.bottom, d / "s1.bottom.csv")
    learn.save_model(model, d / "s1.model.bin")
    stats.save(d / "s1.stats.csv")
    (d / "svc.json").write_text(json.dumps({"surveys": [{
        "id": "s1", "echg": "s1.echg", "bottom": "s1.bottom.csv",
        "model": "s1.model.bin", "stats": "s1.stats.csv",
        "log": "s1.corrections.ndjson",
    }]}))
    return d, prepared


@pytest.fixture()
def client(setup):
    d, _ = setup
    log = d / "s1.corrections.ndjson"
    if log.exists():
        log.unlink()
    app = service.create_app(service.load_state(d / "svc.json"))
    return TestClient(app)


def test_list_surveys(client, setup):
    _, prepared = setup
    out = client.get("/surveys").json()
    assert out == [{"id": "s1", "rows": prepared.echogram.rows, "cols": 400}]


def test_meta(client):
    out = client.get("/surveys/s1/meta").json()
    assert out["depth_step_m"] == 0.2
    assert out["nan_fill_db"] == -200.0
    assert out["has_model"] and out["has_bottom"]
    assert out["seq"] == 0


def test_unknown_survey_404(client):
    assert client.get("/surveys/zz/meta").status_code == 404
    assert client.get("/surveys/zz/tiles").status_code == 404


def test_tiles_payload_decodes(client, setup):
    _, prepared = setup
    out = client.get("/surveys/s1/tiles",
                     params={"start": 10, "count": 32}).json()
    raw = np.frombuffer(base64.b64decode(out["payload"]), dtype="<f4")
    tile = raw.reshape(out["rows"], out["width"])
    np.testing.assert_array_equal(tile, prepared.echogram.sv[:, 10:42])


def test_tiles_downsampled_max_pool(client, setup):
    _, prepared = setup
    out = client.get("/surveys/s1/tiles",
                     params={"start": 0, "count": 64, "width": 16}).json()
    assert out["width"] == 16
    raw = np.frombuffer(base64.b64decode(out["payload"]), dtype="<f4")
    tile = raw.reshape(out["rows"], 16)
    want = prepared.echogram.sv[:, 0:4].max(axis=1)
    np.testing.assert_array_equal(tile[:, 0], want)


def test_tiles_clamped_at_end(client):
    out = client.get("/surveys/s1/tiles",
                     params={"start": 390, "count": 100}).json()
    assert out["count"] == 10


def test_tiles_bad_window_422(client):
    assert client.get("/surveys/s1/tiles",
                      params={"start": 5000}).status_code == 422
    assert client.get("/surveys/s1/tiles",
                      params={"start": -1}).status_code == 422


def test_flags_shape(client):
    out = client.get("/surveys/s1/flags").json()
    assert len(out["probability_strong"]) == 400
    assert len(out["flag"]) == 400
    assert all(0.0 <= p <= 1.0 for p in out["probability_strong"])
    for p, f in zip(out["probability_strong"], out["flag"]):
        assert f == (p >= 0.5)


def test_bottom_lines(client, setup):
    _, prepared = setup
    out = client.get("/surveys/s1/bottom").json()
    assert len(out["bottom_m"]) == 400
    # corrected starts as the expert clean line
    assert out["corrected_m"] == out["clean_bottom_m"]
    finite = [v for v in out["bottom_m"] if v is not None]
    assert len(finite) == 400  # detector depth everywhere


def test_correction_round_trip(client):
    vals = [21.5, 21.625, 21.75]
    r = client.post("/surveys/s1/corrections", json={
        "based_on_seq": 0, "start": 5, "end": 8, "values": vals,
        "author": "reviewer"})
    assert r.status_code == 200 and r.json()["seq"] == 1
    out = client.get("/surveys/s1/bottom").json()
    assert out["corrected_m"][5:8] == pytest.approx(vals, abs=1e-6)
    assert out["seq"] == 1
    evs = client.get("/surveys/s1/corrections").json()
    assert len(evs["events"]) == 1
    assert evs["events"][0]["author"] == "reviewer"


def test_correction_stale_seq_409(client):
    ok = {"based_on_seq": 0, "start": 0, "end": 1, "values": [20.0]}
    assert client.post("/surveys/s1/corrections", json=ok).status_code == 200
    # replay with the old sequence number
    assert client.post("/surveys/s1/corrections", json=ok).status_code == 409
    ok2 = {"based_on_seq": 1, "start": 0, "end": 1, "values": [19.0]}
    assert client.post("/surveys/s1/corrections", json=ok2).status_code == 200


def test_correction_malformed_422(client):
    bad = [
        {"based_on_seq": 0, "start": 5, "end": 5, "values": []},  # empty range
        {"based_on_seq": 0, "start": 5, "end": 7, "values": [1.0]},  # length
        {"based_on_seq": 0, "start": -1, "end": 1, "values": [1.0, 1.0]},
        {"based_on_seq": 0, "start": 0, "end": 1, "values": [1e9]},  # depth
        {"based_on_seq": 0, "start": 0, "end": 1, "values": [-3.0]},
    ]
    for body in bad:
        assert client.post("/surveys/s1/corrections",
                           json=body).status_code == 422
    # missing field -> pydantic validation
    assert client.post("/surveys/s1/corrections",
                       json={"start": 0}).status_code == 422


def test_corrections_since_filter(client):
    for i in range(3):
        client.post("/surveys/s1/corrections", json={
            "based_on_seq": i, "start": i, "end": i + 1, "values": [15.0 + i]})
    out = client.get("/surveys/s1/corrections", params={"since": 2}).json()
    assert [e["seq"] for e in out["events"]] == [3]


def test_log_replay_after_restart(setup):
    d, _ = setup
    log = d / "s1.corrections.ndjson"
    if log.exists():
        log.unlink()
    app = service.create_app(service.load_state(d / "svc.json"))
    with TestClient(app) as c:
        c.post("/surveys/s1/corrections", json={
            "based_on_seq": 0, "start": 2, "end": 4, "values": [18.5, 18.75]})
        before = c.get("/surveys/s1/bottom").json()
    # a fresh process replays the append-only log
    app2 = service.create_app(service.load_state(d / "svc.json"))
    with TestClient(app2) as c2:
        after = c2.get("/surveys/s1/bottom").json()
        assert after["seq"] == 1
        assert np.allclose(
            [v for v in after["corrected_m"] if v is not None],
            [v for v in before["corrected_m"] if v is not None], atol=1e-6)
