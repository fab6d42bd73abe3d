import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaittriage.errors import EmptyInput
from gaittriage.features import (GaitFeatures, avg_peak_distance, avg_peak_prominence,
                                 extract_features, features_from_energy, read_features_csv,
                                 rms_residual, write_features_csv)
from gaittriage.spectro import SpectroParams, melspectrogram_db, MelSpectrogram
from gaittriage.synth import SceneSpec, synth_scene

from conftest import make_clip


def _residual_oracle(e):
    rms = math.sqrt(sum(v * v for v in e) / len(e))
    return sum((v - rms) ** 2 for v in e)


def test_avg_prominence_examples():
    assert avg_peak_prominence([0, 3, 1, 5, 0], 0) == 3.5
    assert avg_peak_prominence(np.full(10, 4.0), 0) == 0.0
    x = np.zeros(30)
    x[12] = 7.0
    assert avg_peak_prominence(x, 0) == 7.0


def test_rms_residual_examples():
    assert rms_residual([2.5, 2.5, 2.5]) == 0.0
    assert rms_residual([3, 4]) == pytest.approx(_residual_oracle([3, 4]), rel=1e-12)
    assert rms_residual([3, 4]) == pytest.approx(0.50253, abs=1e-5)
    c = 1.5
    assert rms_residual([-c, -c]) == pytest.approx(8 * c * c)
    with pytest.raises(EmptyInput):
        rms_residual([])


@given(st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=50))
def test_rms_residual_matches_formula_and_nonnegative(e):
    r = rms_residual(e)
    assert r >= 0
    assert r == pytest.approx(_residual_oracle(e), rel=1e-9, abs=1e-6)


def test_avg_distance_examples():
    x = np.zeros(40)
    for i in (10, 20, 32):
        x[i] = 1.0
    assert avg_peak_distance(x, 0) == 11.0
    assert avg_peak_distance(np.zeros(188), 0) == 188.0
    one = np.zeros(188)
    one[50] = 1.0
    assert avg_peak_distance(one, 0) == 188.0


def test_two_hz_train_distance():
    # 2 Hz at 16 ms per frame -> 31.25 frames between steps
    d = []
    for seed in range(50):
        clip = synth_scene(SceneSpec(duration_s=6.0, cadence_hz=2.0, snr_db=20.0,
                                     step_jitter_frac=0.0, seed=seed)).clip
        d.append(extract_features(melspectrogram_db(clip)).avg_peak_distance)
    assert abs(np.mean(d) - 31.25) <= 2.0


def test_silence_features():
    mel = melspectrogram_db(make_clip(np.zeros(48000)))
    f = extract_features(mel)
    assert f.avg_peak_prominence == 0.0
    assert f.avg_peak_distance == mel.n_frames
    assert f.n_peaks == 0
    # E is a negative constant, so the RMS-centred residual is not zero
    e = mel.values.sum(axis=1)
    assert f.rms_residual == pytest.approx(_residual_oracle(e.tolist()), rel=1e-12)


def test_clean_beats_noisy_over_seeds():
    clean, noisy = [], []
    for seed in range(50):
        a = synth_scene(SceneSpec(snr_db=20.0, seed=seed)).clip
        b = synth_scene(SceneSpec(snr_db=-10.0, seed=seed)).clip
        clean.append(extract_features(melspectrogram_db(a)).avg_peak_prominence)
        noisy.append(extract_features(melspectrogram_db(b)).avg_peak_prominence)
    assert np.mean(clean) > np.mean(noisy)


def test_deterministic():
    clip = synth_scene(SceneSpec(seed=4)).clip
    a = extract_features(melspectrogram_db(clip))
    b = extract_features(melspectrogram_db(clip))
    assert a == b


def test_invariants_on_synthetic():
    for seed in range(10):
        mel = melspectrogram_db(synth_scene(SceneSpec(snr_db=-5.0, distractors=2, seed=seed)).clip)
        f = extract_features(mel)
        assert f.rms_residual >= 0
        assert f.avg_peak_prominence >= 0
        assert 0 < f.avg_peak_distance <= mel.n_frames


def test_needs_two_frames():
    with pytest.raises(EmptyInput):
        features_from_energy([1.0])


def test_csv_roundtrip():
    rows = [("a", GaitFeatures(1.25, 1e9 / 3, 31.0, 5), "GoodGait"),
            ("b", GaitFeatures(0.0, 2.0, 188.0, 0), None)]
    buf = io.StringIO()
    write_features_csv(buf, rows)
    assert buf.getvalue().splitlines()[0] == "id,prominence,residual,distance,label"
    buf.seek(0)
    ids, X, labels = read_features_csv(buf)
    assert ids == ["a", "b"] and labels == ["GoodGait", None]
    np.testing.assert_array_equal(X, [[1.25, 1e9 / 3, 31.0], [0.0, 2.0, 188.0]])
