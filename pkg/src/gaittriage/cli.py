"""Command-line entry point: ``gaittriage <command> [options]``.

Commands: synth, gate, extract, train, eval, filter, report. Any option can
also come from a ``--config`` file of ``key=value`` lines (keys are option
names with dashes or underscores); options on the command line win.

Failures exit with status 1 and a single stderr line
``error: <ErrorType>: <message>``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from ._fileutil import atomic_write
from .audio_io import GateConfig, calibrate_threshold, load_wav, rms_gate
from .classifier import TrainConfig, evaluate, load_model, save_model, split_train_test, train
from .errors import GaitTriageError, InvalidInput
from .features import (DEFAULT_MIN_PROMINENCE_RATIO, features_from_energy, read_features_csv,
                       write_features_csv)
from .manifest import format_manifest, read_manifest, resolve
from .report import energy_csv, scatter_csv, scatter_svg
from .spectro import SpectroParams, energy_signal, melspectrogram_db
from .synth import synth_dataset
from .triage import TriageParams, default_jobs, extract_manifest, triage_dataset, window_segment


def _add_spectro(p):
    d = SpectroParams()
    g = p.add_argument_group("spectrogram / features")
    g.add_argument("--n-fft", type=int, default=d.n_fft)
    g.add_argument("--hop", type=int, default=d.hop, help="STFT hop in samples")
    g.add_argument("--n-mels", type=int, default=d.n_mels)
    g.add_argument("--fmin", type=float, default=d.fmin_hz, help="lowest mel edge (Hz)")
    g.add_argument("--fmax", type=float, default=d.fmax_hz, help="highest mel edge (Hz)")
    g.add_argument("--db-floor", type=float, default=d.db_floor,
                   help="clamp dB values this far below the window peak")
    g.add_argument("--window-s", type=float, default=3.0, help="analysis window length")
    g.add_argument("--hop-s", type=float, default=1.5, help="analysis window hop")
    g.add_argument("--min-prominence-ratio", type=float, default=DEFAULT_MIN_PROMINENCE_RATIO,
                   help="peak threshold as a fraction of the energy range")
    g.add_argument("--smooth-width", type=int, default=0,
                   help="moving-average width applied to the energy signal (0 = off)")


def _add_jobs(p):
    p.add_argument("--jobs", type=int, default=default_jobs(),
                   help="worker processes for per-entry work")
    p.add_argument("--lenient", action="store_true",
                   help="skip unreadable entries instead of aborting")


def _triage_params(a):
    return TriageParams(
        spectro=SpectroParams(a.n_fft, a.hop, a.n_mels, a.fmin, a.fmax, a.db_floor),
        window_s=a.window_s, hop_s=a.hop_s, min_prominence_ratio=a.min_prominence_ratio,
        smooth_width=a.smooth_width, strict=not getattr(a, "lenient", False),
        jobs=getattr(a, "jobs", 1))


def _features_text(windows):
    buf = io.StringIO()
    write_features_csv(buf, ((w.window_id, w.features, w.entry.quality_label) for w in windows))
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands

def cmd_synth(a):
    path = synth_dataset(a.out, a.n_good, a.n_bad, a.seed, a.duration_s, a.n_nongait)
    print(f"wrote {a.n_good + a.n_bad + a.n_nongait} clips and {path}")


def cmd_gate(a):
    clip = load_wav(a.wav)
    threshold = a.threshold
    if a.calibrate:
        threshold = calibrate_threshold(load_wav(a.calibrate), a.percentile, a.frame_len)
    if threshold is None:
        raise InvalidInput("give --threshold or --calibrate")
    segs = rms_gate(clip, GateConfig(threshold, a.frame_len, a.hang_time))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source_id", "start_sample", "end_sample"])
    for s in segs:
        w.writerow([a.source_id or Path(a.wav).stem, s.start_sample, s.end_sample])
    atomic_write(a.out, buf.getvalue())
    print(f"threshold={threshold!r} segments={len(segs)}")


def cmd_extract(a):
    manifest = Path(a.manifest)
    params = _triage_params(a)
    windows, errors = extract_manifest(read_manifest(manifest), manifest.parent, params)
    atomic_write(a.out, _features_text(windows))
    for eid, msg in errors:
        print(f"skipped {eid}: {msg}", file=sys.stderr)
    print(f"wrote {len(windows)} feature rows to {a.out}")


def cmd_train(a):
    with open(a.features, encoding="utf-8") as fh:
        ids, X, labels = read_features_csv(fh)
    rows = [i for i, lab in enumerate(labels) if lab is not None]
    ids = [ids[i] for i in rows]
    X = X[rows]
    labels = [labels[i] for i in rows]
    if a.test_fraction > 0:
        tr, te = split_train_test(labels, a.test_fraction, a.seed)
        if a.holdout:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["id", "prominence", "residual", "distance", "label"])
            for i in te:
                w.writerow([ids[i], *(repr(float(v)) for v in X[i]), labels[i]])
            atomic_write(a.holdout, buf.getvalue())
        X, labels = X[tr], [labels[i] for i in tr]
    cfg = TrainConfig(n_folds=a.folds, seed=a.seed, ensemble=not a.no_ensemble,
                      time_budget_s=a.budget_s, threshold=a.threshold)
    model, report = train(X, labels, cfg)
    save_model(model, a.out)
    if a.report:
        atomic_write(a.report, json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"trained on {len(labels)} windows; selected {', '.join(report['selected'])}; "
          f"CV macro-F1 {report['selected_mean_macro_f1']:.4f}")


def _load_model(a):
    model = load_model(a.model)
    if getattr(a, "threshold", None) is not None:
        model.threshold = a.threshold
    return model


def cmd_eval(a):
    model = _load_model(a)
    with open(a.features, encoding="utf-8") as fh:
        _, X, labels = read_features_csv(fh)
    keep = [i for i, lab in enumerate(labels) if lab is not None]
    if not keep:
        raise InvalidInput("feature CSV has no labelled rows")
    m = evaluate(model, X[keep], [labels[i] for i in keep])
    if a.out_json:
        atomic_write(a.out_json, json.dumps(m.to_dict(), indent=2, sort_keys=True) + "\n")
    if a.out_csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "precision", "recall", "f1", "support"])
        for r in m.table_rows():
            w.writerow([r[0], *(f"{v:.6f}" for v in r[1:4]), r[4]])
        atomic_write(a.out_csv, buf.getvalue())
    print(f"{'class':<10}{'precision':>10}{'recall':>10}{'f1':>10}{'support':>9}")
    for r in m.table_rows():
        print(f"{r[0]:<10}{r[1]:>10.2f}{r[2]:>10.2f}{r[3]:>10.2f}{r[4]:>9}")
    print()
    print(m.confusion_text(), end="")


def cmd_filter(a):
    manifest = Path(a.manifest)
    model = _load_model(a)
    params = _triage_params(a)
    kept, report = triage_dataset(read_manifest(manifest), model, manifest.parent, params)
    out = Path(a.out)
    # kept entries keep their source paths; rewrite them relative to the output manifest
    rebased = [_rebase(e, manifest.parent, out.parent) for e in kept]
    atomic_write(out, format_manifest(rebased, jsonl=out.suffix in (".jsonl", ".ndjson")))
    if a.features_out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "prominence", "residual", "distance", "label"])
        quality = {e.id: e.quality_label for e in read_manifest(manifest)}
        for d in report.decisions:
            if d.get("features") is not None:
                w.writerow([d["window_id"], *(repr(v) for v in d["features"]),
                            quality.get(d["entry_id"]) or ""])
        atomic_write(a.features_out, buf.getvalue())
        report.features_csv = str(a.features_out)
    atomic_write(a.report, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    c = report.counts
    print(" ".join(f"{k}: in={v['in']} kept={v['kept']} removed={v['removed']}"
                   for k, v in c.items()))


def _rebase(entry, src_dir, dst_dir):
    p = Path(entry.path)
    if p.is_absolute():
        return entry
    target = (Path(src_dir) / p).resolve()
    return replace(entry, path=os.path.relpath(target, Path(dst_dir).resolve()))


def cmd_report(a):
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(a.features, encoding="utf-8") as fh:
        ids, X, labels = read_features_csv(fh)
    atomic_write(out / "scatter.csv", scatter_csv(ids, X, labels))
    made = ["scatter.csv"]
    if a.svg:
        atomic_write(out / "scatter.svg", scatter_svg(X, labels))
        made.append("scatter.svg")
    if a.window:
        if not a.manifest:
            raise InvalidInput("--window needs --manifest")
        manifest = Path(a.manifest)
        entry_id = a.window.split("#w")[0]
        entries = {e.id: e for e in read_manifest(manifest)}
        if entry_id not in entries:
            raise InvalidInput(f"no manifest entry {entry_id!r}")
        e = entries[entry_id]
        params = _triage_params(a)
        clip = load_wav(resolve(e, manifest.parent))
        wins = {w.id: w for w in window_segment(clip, e, params.window_s, params.hop_s)}
        if a.window not in wins:
            raise InvalidInput(f"no window {a.window!r}; have {sorted(wins)}")
        E = energy_signal(melspectrogram_db(wins[a.window].clip, params.spectro))
        thr = params.min_prominence_ratio * float(E.values.max() - E.values.min())
        name = "energy_" + "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in a.window) + ".csv"
        atomic_write(out / name, energy_csv(E, thr))
        made.append(name)
        f = features_from_energy(E, params.min_prominence_ratio, params.smooth_width)
        print(f"{a.window}: prominence={f.avg_peak_prominence:.3f} "
              f"residual={f.rms_residual:.6g} distance={f.avg_peak_distance:.3f} peaks={f.n_peaks}")
    print("wrote " + ", ".join(str(out / m) for m in made))


# --------------------------------------------------------------------------
# parser

def build_parser():
    p = argparse.ArgumentParser(
        prog="gaittriage", formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        description="Triage acoustic gait recordings: extract energy-signal features, "
                    "train a good/bad filter, apply it to a manifest.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="file of key=value defaults, overridden by flags")
    sub = p.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    s = sub.add_parser("synth", help="generate a labelled synthetic dataset", formatter_class=fmt)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--n-good", type=int, default=200)
    s.add_argument("--n-bad", type=int, default=200)
    s.add_argument("--n-nongait", type=int, default=0)
    s.add_argument("--duration-s", type=float, default=3.0)
    s.add_argument("--seed", type=int, default=7)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("gate", help="RMS activity gate over one WAV", formatter_class=fmt)
    s.add_argument("--wav", required=True)
    s.add_argument("--out", required=True, help="segments CSV")
    s.add_argument("--threshold", type=float, default=None, help="RMS threshold")
    s.add_argument("--calibrate", help="background WAV to derive the threshold from")
    s.add_argument("--percentile", type=float, default=95.0)
    s.add_argument("--frame-len", type=int, default=1600)
    s.add_argument("--hang-time", type=int, default=5, help="frames held open after activity")
    s.add_argument("--source-id", default=None)
    s.set_defaults(func=cmd_gate)

    s = sub.add_parser("extract", help="manifest -> feature CSV", formatter_class=fmt)
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", required=True)
    _add_spectro(s)
    _add_jobs(s)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("train", help="feature CSV -> model file", formatter_class=fmt)
    s.add_argument("--features", required=True)
    s.add_argument("--out", required=True, help="model file (JSON)")
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--budget-s", type=float, default=300.0, help="wall-clock cap for the sweep")
    s.add_argument("--no-ensemble", action="store_true", help="keep only the best candidate")
    s.add_argument("--threshold", type=float, default=0.5, help="GoodGait score threshold")
    s.add_argument("--test-fraction", type=float, default=0.0,
                   help="hold out this stratified fraction before training")
    s.add_argument("--holdout", help="write the held-out rows to this CSV")
    s.add_argument("--report", help="write the CV report JSON here")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="metrics of a model on labelled features", formatter_class=fmt)
    s.add_argument("--model", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--out-json")
    s.add_argument("--out-csv")
    s.add_argument("--threshold", type=float, default=None, help="override the model threshold")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("filter", help="apply a model to a manifest", formatter_class=fmt)
    s.add_argument("--manifest", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True, help="filtered manifest (.csv or .jsonl)")
    s.add_argument("--report", required=True, help="triage report JSON")
    s.add_argument("--features-out", help="feature CSV of all gait windows")
    s.add_argument("--threshold", type=float, default=None, help="override the model threshold")
    _add_spectro(s)
    _add_jobs(s)
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("report", help="scatter and energy-trace data", formatter_class=fmt)
    s.add_argument("--features", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--svg", action="store_true", help="also draw scatter.svg (needs matplotlib)")
    s.add_argument("--manifest", help="manifest holding the --window entry")
    s.add_argument("--window", help="window id whose energy signal to dump")
    _add_spectro(s)
    s.set_defaults(func=cmd_report)
    return p


def read_config(path):
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return argv
    conf = read_config(known.config)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in sub.choices.values():
        defaults = {}
        for act in sp._actions:
            if act.dest in conf:
                raw = conf[act.dest]
                if act.const is True and act.nargs == 0:
                    defaults[act.dest] = raw.lower() in ("1", "true", "yes", "on")
                else:
                    defaults[act.dest] = act.type(raw) if act.type else raw
                if act.required:
                    act.required = False
        sp.set_defaults(**defaults)
    return rest


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        np.seterr(all="ignore")
        args.func(args)
    except (GaitTriageError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
