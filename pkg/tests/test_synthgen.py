import numpy as np
import pytest
from scipy import stats as sps

from echoflag import bottomline, echogram as eg, synthgen
from echoflag.errors import InvalidConfig


@pytest.fixture(scope="module")
def survey():
    cfg = synthgen.SurveyConfig(cols=1500, seed=42)
    return cfg, *synthgen.generate(cfg)


def test_generate_deterministic():
    cfg = synthgen.SurveyConfig(cols=120, seed=9)
    e1, r1, t1 = synthgen.generate(cfg)
    e2, r2, t2 = synthgen.generate(synthgen.SurveyConfig(cols=120, seed=9))
    assert e1.sv.tobytes() == e2.sv.tobytes()
    np.testing.assert_array_equal(
        np.nan_to_num(r1.clean_bottom_m), np.nan_to_num(r2.clean_bottom_m))
    np.testing.assert_array_equal(t1.artifact_tag, t2.artifact_tag)


def test_generate_ping_streams_independent_of_cols():
    """Without survey-level artifact placement, extending the survey never
    changes already-generated columns (one PCG64 stream per ping)."""
    def cfg(cols):
        return synthgen.SurveyConfig(cols=cols, seed=3, no_bottom_rate=0.0,
                                     strong_correction_rate=0.0,
                                     artifact_mix=synthgen.ArtifactMix(
                                         soft_bottom_blur=0.0))
    short = synthgen.generate(cfg(50))[0]
    long = synthgen.generate(cfg(80))[0]
    assert short.sv.tobytes() == long.sv[:, :50].tobytes()


def test_seed_changes_output():
    e1 = synthgen.generate(synthgen.SurveyConfig(cols=40, seed=1))[0]
    e2 = synthgen.generate(synthgen.SurveyConfig(cols=40, seed=2))[0]
    assert e1.sv.tobytes() != e2.sv.tobytes()


def test_shapes_and_metadata(survey):
    cfg, e, rec, truth = survey
    assert e.sv.shape == (cfg.rows, cfg.cols)
    assert e.depth_step_m == cfg.depth_step_m
    assert rec.clean_bottom_m.shape == (cfg.cols,)
    assert truth.artifact_tag.shape == (cfg.cols,)
    assert np.isnan(rec.bottom_m).all()  # detector fills this later


def test_no_bottom_rate(survey):
    cfg, e, rec, truth = survey
    frac = 1.0 - truth.bottom_present.mean()
    # binomial(1500, 0.02): ~4 sigma band
    assert abs(frac - cfg.no_bottom_rate) < 0.015
    assert np.isnan(rec.clean_bottom_m[~truth.bottom_present]).all()


def test_bottomless_pings_have_no_nan_padding(survey):
    cfg, e, rec, truth = survey
    j = int(np.flatnonzero(~truth.bottom_present)[0])
    assert not np.isnan(e.sv[:, j]).any()


def test_nan_padding_below_bottom(survey):
    cfg, e, rec, truth = survey
    lo, hi = synthgen.NAN_OFFSET_RANGE[cfg.nan_style]
    present = truth.bottom_present & (truth.artifact_tag != synthgen.TAG_OFFSET)
    for j in np.flatnonzero(present)[:200]:
        nans = np.flatnonzero(np.isnan(e.sv[:, j]))
        if nans.size == 0:
            continue  # padding starts past the last row
        start_m = nans[0] * cfg.depth_step_m
        gap = start_m - truth.true_bottom_m[j]
        assert lo - cfg.depth_step_m <= gap <= hi + cfg.depth_step_m
        assert np.isnan(e.sv[nans[0]:, j]).all()  # contiguous to the end


def test_nan_styles_differ():
    """Style B pads NaN further below the bottom than style A."""
    gaps = {}
    for style in (synthgen.STYLE_A, synthgen.STYLE_B):
        cfg = synthgen.SurveyConfig(cols=400, seed=11, nan_style=style,
                                    strong_correction_rate=0.0,
                                    no_bottom_rate=0.0)
        e, rec, truth = synthgen.generate(cfg)
        g = []
        for j in range(cfg.cols):
            nans = np.flatnonzero(np.isnan(e.sv[:, j]))
            if nans.size:
                g.append(nans[0] * cfg.depth_step_m - truth.true_bottom_m[j])
        gaps[style] = np.array(g)
    assert gaps[synthgen.STYLE_A].mean() < gaps[synthgen.STYLE_B].mean() - 2.0
    p = sps.mannwhitneyu(gaps[synthgen.STYLE_A], gaps[synthgen.STYLE_B]).pvalue
    assert p < 1e-6


def test_offset_runs_are_contiguous_and_constant(survey):
    cfg, e, rec, truth = survey
    tags = truth.artifact_tag
    runs = []
    j = 0
    while j < cfg.cols:
        if tags[j] == synthgen.TAG_OFFSET:
            k = j
            while k < cfg.cols and tags[k] == synthgen.TAG_OFFSET:
                k += 1
            runs.append((j, k))
            j = k
        else:
            j += 1
    assert runs, "survey should contain offset runs"
    for j, k in runs:
        assert k - j >= 2  # runs, not isolated pings


def test_offset_moves_bottom_but_not_ringdown_band(survey):
    cfg, e, rec, truth = survey
    off = np.flatnonzero(truth.artifact_tag == synthgen.TAG_OFFSET)
    assert off.size
    # the ring-down band is pinned to the transducer: top rows stay bright
    for j in off[:20]:
        assert e.sv[:cfg.surface_band_rows, j].mean() > -30.0
    # but the echo (and with it the detected bottom) sits above the true line
    trimmed = eg.trim_rows(e, 12)
    det = bottomline.detect_bottom(eg.replace_nan(trimmed))
    lo, hi = synthgen.OFFSET_RANGE_M
    shift = truth.true_bottom_m[off] - det[off]
    assert (shift > lo - 0.5).all() and (shift < hi + 0.5).all()


def test_plankton_layer_detector_stays_at_bottom(survey):
    """The soft-topped layer never out-steps the bottom edge, so the
    detector misses by the layer gap; the expert cut sits above the layer."""
    cfg, e, rec, truth = survey
    trimmed = eg.trim_rows(e, 12)
    det = bottomline.detect_bottom(eg.replace_nan(trimmed))
    pl = np.flatnonzero(truth.artifact_tag == synthgen.TAG_PLANKTON)
    assert pl.size
    dist = np.abs(det[pl] - rec.clean_bottom_m[pl])
    lo, hi = synthgen.PLANKTON_GAP_RANGE_M
    pad = cfg.expert_cut_m + 2 * cfg.depth_step_m
    assert (dist > lo - pad - 0.5).mean() > 0.95
    assert (dist < hi + pad + 0.5).mean() > 0.95


def test_clean_pings_detected_within_one_cell(survey):
    cfg, e, rec, truth = survey
    trimmed = eg.trim_rows(e, 12)
    det = bottomline.detect_bottom(eg.replace_nan(trimmed))
    clean = np.flatnonzero(truth.bottom_present
                           & (truth.artifact_tag == synthgen.TAG_NONE))
    cells = np.abs(np.round(det[clean] / cfg.depth_step_m)
                   - np.round(truth.true_bottom_m[clean] / cfg.depth_step_m))
    assert (cells <= 1).mean() >= 0.99


def test_strong_rate_near_target(survey):
    cfg, e, rec, truth = survey
    trimmed = eg.trim_rows(e, 12)
    kept, dropped = eg.filter_no_bottom(trimmed)
    det = bottomline.detect_bottom(eg.replace_nan(trimmed))
    labels = bottomline.label_pings(
        eg.BottomRecord(det, rec.clean_bottom_m), no_bottom=dropped)
    rate = (labels == bottomline.STRONG).mean()
    assert abs(rate - cfg.strong_correction_rate) < 0.2 * cfg.strong_correction_rate


def test_domain_pair_rates_and_styles():
    (ea, ra, ta), (eb, rb, tb) = synthgen.make_domain_pair(5, 6, 1200, 1200)
    ca, cb = synthgen.domain_pair_configs(5, 6, 1200, 1200)
    assert ca.strong_correction_rate == 0.13 and cb.strong_correction_rate == 0.01
    assert ca.nan_style != cb.nan_style
    assert ea.cols == eb.cols == 1200
    assert (ta.artifact_tag > 0).mean() > (tb.artifact_tag > 0).mean()


def test_domain_pair_min_size():
    with pytest.raises(InvalidConfig):
        synthgen.domain_pair_configs(1, 2, 500, 1200)


def test_config_validation():
    with pytest.raises(InvalidConfig):
        synthgen.SurveyConfig(rows=4).validate()
    with pytest.raises(InvalidConfig):
        synthgen.SurveyConfig(strong_correction_rate=1.5).validate()
    with pytest.raises(InvalidConfig):
        synthgen.SurveyConfig(nan_style="style_C").validate()
    with pytest.raises(InvalidConfig):
        synthgen.SurveyConfig(strong_correction_rate=0.9,
                              no_bottom_rate=0.2).validate()


def test_config_file_round_trip(tmp_path):
    cfg = synthgen.SurveyConfig(cols=77, seed=13, nan_style=synthgen.STYLE_B)
    cfg.bottom_profile.mean_depth_m = 30.0
    cfg.artifact_mix.plankton_layer = 0.7
    p = tmp_path / "survey.cfg"
    synthgen.save_config(cfg, p)
    out = synthgen.load_config(p)
    assert out == cfg


def test_config_file_unknown_key(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("wibble = 3\n")
    with pytest.raises(InvalidConfig):
        synthgen.load_config(p)


def test_config_file_comments_and_blanks(tmp_path):
    p = tmp_path / "ok.cfg"
    p.write_text("# header\n\ncols = 55  # inline\nseed = 4\n")
    cfg = synthgen.load_config(p)
    assert cfg.cols == 55 and cfg.seed == 4
