"""Apply a trained model as a filter over a manifest of gait recordings.

Each manifest span is cut into fixed windows (3 s with a 1.5 s hop by
default), each window becomes one melspectrogram and one feature vector,
and Gait windows predicted BadGait are dropped. NonGait windows are passed
through untouched: the model only ever saw gait examples.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .audio_io import CANONICAL_RATE, AudioClip, load_wav
from .classifier import Metrics, TriageModel
from .errors import GaitTriageError, InvalidInput, ManifestError
from .features import DEFAULT_MIN_PROMINENCE_RATIO, GaitFeatures, extract_features
from .manifest import CLASS_LABELS, GAIT, GOOD, NON_GAIT, ManifestEntry, resolve
from .spectro import SpectroParams, mel_filterbank, melspectrogram_db

MIN_SHORT_SPAN_S = 1.0

# headline numbers from the reference study, kept for side-by-side reports only
REFERENCE = {
    "detector_f1_before": 0.58,
    "detector_f1_gain": 0.25,
    "gait_windows_in": 1399,
    "nongait_windows_in": 2110,
    "gait_windows_kept": 275,
    "note": "downstream detector is not part of this toolkit; values are not computed here",
}


@dataclass(frozen=True)
class TriageParams:
    spectro: SpectroParams = field(default_factory=SpectroParams)
    window_s: float = 3.0
    hop_s: float = 1.5
    min_prominence_ratio: float = DEFAULT_MIN_PROMINENCE_RATIO
    smooth_width: int = 0
    strict: bool = True
    jobs: int = 1


class Window(NamedTuple):
    id: str
    clip: AudioClip
    start_s: float
    end_s: float


@dataclass
class WindowFeatures:
    window_id: str
    entry: ManifestEntry
    start_s: float
    end_s: float
    features: GaitFeatures


@dataclass
class TriageReport:
    counts: dict
    decisions: list
    errors: list = field(default_factory=list)
    features_csv: str | None = None
    model: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def window_segment(clip: AudioClip, entry: ManifestEntry, window_s=3.0, hop_s=1.5):
    """Cut an entry's span into fixed-length windows.

    Spans at least ``window_s`` long give ``floor((span - window) / hop) + 1``
    windows that all lie inside the span. A shorter span (but at least
    1 s) gives a single window zero-padded at the tail.
    """
    sr = clip.sample_rate_hz
    start = int(round(entry.start_s * sr))
    end = int(round(entry.end_s * sr))
    if start < 0 or end > len(clip) or start >= end:
        raise InvalidInput(
            f"{entry.id}: span {entry.start_s}-{entry.end_s}s lies outside the "
            f"{len(clip) / sr:.3f}s clip")
    win = int(round(window_s * sr))
    hop = int(round(hop_s * sr))
    if win < 1 or hop < 1:
        raise InvalidInput("window_s and hop_s must be positive")
    span = end - start
    x = clip.samples
    if span < win:
        if span < MIN_SHORT_SPAN_S * sr:
            raise InvalidInput(f"{entry.id}: span shorter than {MIN_SHORT_SPAN_S}s")
        padded = np.zeros(win)
        padded[:span] = x[start:end]
        return [Window(f"{entry.id}#w0", AudioClip(padded, sr, clip.source_id),
                       start / sr, end / sr)]
    out = []
    for k in range((span - win) // hop + 1):
        s = start + k * hop
        out.append(Window(f"{entry.id}#w{k}", AudioClip(x[s:s + win], sr, clip.source_id),
                          s / sr, (s + win) / sr))
    return out


def _entry_features(args):
    entry, base_dir, params, fb = args
    try:
        clip = load_wav(resolve(entry, base_dir))
        if fb is None or clip.sample_rate_hz != CANONICAL_RATE:
            fb = mel_filterbank(params.spectro, clip.sample_rate_hz)
        out = []
        for w in window_segment(clip, entry, params.window_s, params.hop_s):
            mel = melspectrogram_db(w.clip, params.spectro, fb)
            f = extract_features(mel, params.min_prominence_ratio, params.smooth_width)
            out.append(WindowFeatures(w.id, entry, w.start_s, w.end_s, f))
        return out, None
    except (OSError, GaitTriageError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _map(fn, items, jobs):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
    return [fn(a) for a in items]


def default_jobs():
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def extract_manifest(entries, base_dir, params: TriageParams | None = None, only_class=None):
    """Window every entry and compute features.

    Returns ``(window_features, errors)``. In strict mode the first failing
    entry raises :class:`ManifestError`; otherwise failures are collected as
    ``(entry_id, message)`` pairs and the entry is skipped.
    """
    params = params or TriageParams()
    fb = mel_filterbank(params.spectro, CANONICAL_RATE)
    todo = [e for e in entries if only_class is None or e.class_label == only_class]
    results = _map(_entry_features, [(e, base_dir, params, fb) for e in todo], params.jobs)
    windows, errors = [], []
    for e, (rows, err) in zip(todo, results):
        if err is not None:
            if params.strict:
                raise ManifestError(e.id, err)
            errors.append((e.id, err))
            continue
        windows.extend(rows)
    return windows, errors


def triage_dataset(entries, model: TriageModel, base_dir, params: TriageParams | None = None):
    """Filter a manifest; returns ``(kept_entries, TriageReport)``.

    Every kept window becomes its own manifest entry (id = window id) with
    the source entry's labels.
    """
    params = params or TriageParams()
    gait_windows, errors = extract_manifest(entries, base_dir, params, only_class=GAIT)
    decided = {}
    if gait_windows:
        labels, scores = model.predict_labels([w.features for w in gait_windows])
        for w, lab, s in zip(gait_windows, labels, scores):
            decided[w.window_id] = (w, lab, float(s))

    failed = {eid for eid, _ in errors}
    counts = {c: {"in": 0, "kept": 0, "removed": 0} for c in CLASS_LABELS}
    kept, decisions = [], []
    by_entry = {}
    for w, _, _ in decided.values():
        by_entry.setdefault(w.entry.id, []).append(w)
    for e in entries:
        if e.id in failed:
            continue
        if e.class_label == NON_GAIT:
            spans = _nongait_windows(e, base_dir, params, errors)
            if spans is None:
                continue
            for wid, s0, s1 in spans:
                counts[NON_GAIT]["in"] += 1
                counts[NON_GAIT]["kept"] += 1
                kept.append(ManifestEntry(wid, e.path, s0, s1, NON_GAIT, e.quality_label))
                decisions.append({"window_id": wid, "entry_id": e.id, "class_label": NON_GAIT,
                                  "predicted": None, "good_score": None, "kept": True})
            continue
        for w in by_entry.get(e.id, []):
            _, lab, s = decided[w.window_id]
            keep = lab == GOOD
            counts[GAIT]["in"] += 1
            counts[GAIT]["kept" if keep else "removed"] += 1
            if keep:
                kept.append(ManifestEntry(w.window_id, e.path, w.start_s, w.end_s, GAIT,
                                          e.quality_label))
            decisions.append({"window_id": w.window_id, "entry_id": e.id, "class_label": GAIT,
                              "predicted": lab, "good_score": s, "kept": keep,
                              "features": [w.features.avg_peak_prominence,
                                           w.features.rms_residual,
                                           w.features.avg_peak_distance]})
    report = TriageReport(
        counts=counts,
        decisions=decisions,
        errors=[{"entry_id": eid, "message": msg} for eid, msg in errors],
        model=_model_summary(model),
        params={"window_s": params.window_s, "hop_s": params.hop_s,
                "min_prominence_ratio": params.min_prominence_ratio,
                "smooth_width": params.smooth_width, "threshold": model.threshold,
                "spectro": asdict(params.spectro)},
    )
    return kept, report


def _nongait_windows(entry, base_dir, params, errors):
    # NonGait windows need only their spans, not features
    try:
        clip = load_wav(resolve(entry, base_dir))
        return [(w.id, w.start_s, w.end_s)
                for w in window_segment(clip, entry, params.window_s, params.hop_s)]
    except (OSError, GaitTriageError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        if params.strict:
            raise ManifestError(entry.id, msg) from exc
        errors.append((entry.id, msg))
        return None


def _model_summary(model):
    meta = model.metadata or {}
    cv = meta.get("cv_report", {})
    return {"seed": meta.get("seed"), "components": [c.name for c in model.components],
            "weights": [c.weight for c in model.components],
            "cv_macro_f1": cv.get("selected_mean_macro_f1")}


def filter_effectiveness(before: Metrics, after: Metrics) -> dict:
    """Per-class and macro deltas (after minus before) of precision, recall, F1.

    The reference study's headline detector gain is attached for comparison;
    it is not recomputed.
    """
    if tuple(before.classes) != tuple(after.classes):
        raise InvalidInput(f"class sets differ: {before.classes} vs {after.classes}")
    rows = {}
    for c in before.classes:
        rows[c] = {m: getattr(after, m)(c) - getattr(before, m)(c)
                   for m in ("precision", "recall", "f1")}
    rows["macro"] = {
        "precision": after.macro_precision - before.macro_precision,
        "recall": after.macro_recall - before.macro_recall,
        "f1": after.macro_f1 - before.macro_f1,
    }
    return {"deltas": rows,
            "before": before.to_dict(), "after": after.to_dict(),
            "reference": {"f1_before": REFERENCE["detector_f1_before"],
                          "f1_gain": REFERENCE["detector_f1_gain"],
                          "note": REFERENCE["note"]}}

