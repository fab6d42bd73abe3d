import numpy as np
import pytest

from gaittriage.audio_io import AudioClip, write_wav
from gaittriage.classifier import Metrics, TrainConfig, train
from gaittriage.errors import InvalidInput, ManifestError
from gaittriage.manifest import (BAD, GAIT, GOOD, NON_GAIT, ManifestEntry, format_manifest,
                                 read_manifest)
from gaittriage.synth import synth_dataset
from gaittriage.triage import (REFERENCE, TriageParams, extract_manifest, filter_effectiveness,
                               triage_dataset, window_segment)

from conftest import make_clip


class ConstantModel:
    """Stand-in exposing the model surface triage relies on."""

    def __init__(self, score):
        self.score = score
        self.threshold = 0.5
        self.metadata = {}
        self.components = []

    def predict_labels(self, X):
        n = len(X)
        return [GOOD if self.score >= self.threshold else BAD] * n, np.full(n, self.score)


def entry(start, end, eid="e"):
    return ManifestEntry(eid, "x.wav", start, end)


def test_window_counts():
    clip = make_clip(np.zeros(30 * 16000))
    wins = window_segment(clip, entry(0.0, 30.0), 3.0, 1.5)
    assert len(wins) == 19
    assert wins[0].id == "e#w0" and wins[-1].id == "e#w18"
    assert all(len(w.clip) == 48000 for w in wins)
    assert [w.id for w in window_segment(clip, entry(0.0, 30.0))] == [w.id for w in wins]


def test_short_segment_zero_padded():
    x = np.full(5 * 16000, 0.25)
    wins = window_segment(make_clip(x), entry(1.0, 3.0), 3.0, 1.5)
    assert len(wins) == 1
    w = wins[0].clip.samples
    assert len(w) == 48000 and (w[:32000] == 0.25).all() and (w[32000:] == 0).all()
    assert (wins[0].start_s, wins[0].end_s) == (1.0, 3.0)


def test_span_errors():
    clip = make_clip(np.zeros(16000))
    with pytest.raises(InvalidInput):
        window_segment(clip, entry(0.0, 2.0))
    with pytest.raises(InvalidInput):
        window_segment(make_clip(np.zeros(48000)), entry(0.0, 0.5))


@pytest.fixture(scope="module")
def mixed(tmp_path_factory):
    root = tmp_path_factory.mktemp("mixed")
    manifest = synth_dataset(root, 12, 12, seed=21, n_nongait=4)
    return root, read_manifest(manifest)


def test_pass_through_and_full_rejection(mixed):
    root, entries = mixed
    kept, rep = triage_dataset(entries, ConstantModel(0.9), root)
    assert [e.id.split("#")[0] for e in kept] == [e.id for e in entries]
    kept, rep = triage_dataset(entries, ConstantModel(0.1), root)
    assert all(e.class_label == NON_GAIT for e in kept)
    assert rep.counts[GAIT] == {"in": 24, "kept": 0, "removed": 24}
    assert rep.counts[NON_GAIT] == {"in": 4, "kept": 4, "removed": 0}


def test_real_model_reconciles_and_is_idempotent(mixed, tmp_path):
    root, entries = mixed
    windows, _ = extract_manifest(entries, root, only_class=GAIT)
    X = [w.features for w in windows]
    y = [w.entry.quality_label for w in windows]
    model, _ = train(X, y, TrainConfig(n_folds=3, seed=0))
    kept, rep = triage_dataset(entries, model, root)
    for c in rep.counts.values():
        assert c["kept"] + c["removed"] == c["in"]
    # write and re-read the filtered manifest, then filter again
    (root / "filtered.csv").write_text(format_manifest(kept))
    again, rep2 = triage_dataset(read_manifest(root / "filtered.csv"), model, root)
    assert rep2.counts[GAIT]["removed"] == 0
    assert len(again) == len(kept)
    # decisions do not depend on manifest order
    _, rep3 = triage_dataset(list(reversed(entries)), model, root)
    a = {d["window_id"]: d["kept"] for d in rep.decisions}
    b = {d["window_id"]: d["kept"] for d in rep3.decisions}
    assert a == b


def test_missing_file_strict_and_lenient(mixed):
    root, entries = mixed
    broken = entries[:3] + [ManifestEntry("ghost", "nope.wav", 0.0, 3.0)]
    with pytest.raises(ManifestError) as err:
        triage_dataset(broken, ConstantModel(0.9), root)
    assert err.value.entry_id == "ghost"
    kept, rep = triage_dataset(broken, ConstantModel(0.9), root, TriageParams(strict=False))
    assert len(kept) == 3
    assert rep.errors[0]["entry_id"] == "ghost"


def test_parallel_matches_serial(mixed):
    root, entries = mixed
    a, _ = extract_manifest(entries, root, TriageParams(jobs=1))
    b, _ = extract_manifest(entries, root, TriageParams(jobs=2))
    assert [(w.window_id, w.features) for w in a] == [(w.window_id, w.features) for w in b]


def _metrics(tp_gait, fp, fn, tn):
    return Metrics(np.array([[tn, fp], [fn, tp_gait]]), (NON_GAIT, GAIT))


def test_filter_effectiveness():
    m = _metrics(29, 21, 21, 100)
    same = filter_effectiveness(m, m)
    assert all(v == 0 for row in same["deltas"].values() for v in row.values())
    before = _metrics(29, 21, 21, 100)   # gait F1 = 58 / 100
    after = _metrics(83, 17, 17, 100)    # gait F1 = 166 / 200
    assert before.f1(GAIT) == pytest.approx(0.58) and after.f1(GAIT) == pytest.approx(0.83)
    out = filter_effectiveness(before, after)
    assert out["deltas"][GAIT]["f1"] == pytest.approx(0.25)
    assert set(out["deltas"]) == {NON_GAIT, GAIT, "macro"}
    assert out["reference"]["f1_gain"] == REFERENCE["detector_f1_gain"] == 0.25
    with pytest.raises(InvalidInput):
        filter_effectiveness(before, Metrics(np.eye(2, dtype=int)))


def test_manifest_jsonl_roundtrip(tmp_path):
    es = [ManifestEntry("a", "a.wav", 0.0, 3.0, GAIT, GOOD),
          ManifestEntry("b,c", "b.wav", 1.5, 4.5, NON_GAIT, None)]
    (tmp_path / "m.jsonl").write_text(format_manifest(es, jsonl=True))
    (tmp_path / "m.csv").write_text(format_manifest(es))
    assert read_manifest(tmp_path / "m.jsonl") == es
    assert read_manifest(tmp_path / "m.csv") == es


def test_manifest_rejects_duplicates(tmp_path):
    from gaittriage.errors import ParseError
    es = [ManifestEntry("a", "a.wav", 0.0, 3.0)] * 2
    (tmp_path / "m.csv").write_text(format_manifest(es))
    with pytest.raises(ParseError):
        read_manifest(tmp_path / "m.csv")
