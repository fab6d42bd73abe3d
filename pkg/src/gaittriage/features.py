"""The three triage features computed from a melspectrogram energy signal.

* average peak prominence of the energy signal
* RMS residual: ``sum((E - rms(E))**2)``, a raw sum around the RMS, not the
  variance around the mean
* average distance between consecutive peaks, in frames

Windows with fewer than two peaks get the window length as their peak
distance, and windows without peaks get prominence 0.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InvalidInput, ParseError
from .peaks import peak_arrays, smooth
from .spectro import EnergySignal, MelSpectrogram, energy_signal

DEFAULT_MIN_PROMINENCE_RATIO = 0.05

FEATURE_NAMES = ("prominence", "residual", "distance")


@dataclass(frozen=True)
class GaitFeatures:
    avg_peak_prominence: float
    rms_residual: float
    avg_peak_distance: float
    n_peaks: int = 0

    def as_array(self) -> np.ndarray:
        return np.array([self.avg_peak_prominence, self.rms_residual, self.avg_peak_distance])


def _values(E):
    return np.asarray(E.values if isinstance(E, EnergySignal) else E, dtype=np.float64)


def avg_peak_prominence(E, min_prominence: float = 0.0) -> float:
    _, prom = peak_arrays(_values(E), min_prominence)
    return float(prom.mean()) if prom.size else 0.0


def rms_residual(E) -> float:
    e = _values(E)
    if e.size == 0:
        raise EmptyInput("energy signal is empty")
    rms = np.sqrt(np.mean(e * e))
    r = e - rms
    return float(np.sum(r * r))


def avg_peak_distance(E, min_prominence: float = 0.0) -> float:
    e = _values(E)
    idx, _ = peak_arrays(e, min_prominence)
    if idx.size < 2:
        return float(e.size)
    return float(np.mean(np.diff(idx)))


def features_from_energy(E, min_prominence_ratio: float = DEFAULT_MIN_PROMINENCE_RATIO,
                         smooth_width: int = 0) -> GaitFeatures:
    e = smooth(_values(E), smooth_width)
    if e.size < 2:
        raise EmptyInput("need at least 2 frames")
    min_prom = min_prominence_ratio * float(e.max() - e.min())
    idx, prom = peak_arrays(e, min_prom)
    return GaitFeatures(
        avg_peak_prominence=float(prom.mean()) if prom.size else 0.0,
        rms_residual=rms_residual(e),
        avg_peak_distance=float(np.mean(np.diff(idx))) if idx.size >= 2 else float(e.size),
        n_peaks=int(idx.size),
    )


def extract_features(mel: MelSpectrogram,
                     min_prominence_ratio: float = DEFAULT_MIN_PROMINENCE_RATIO,
                     smooth_width: int = 0) -> GaitFeatures:
    return features_from_energy(energy_signal(mel), min_prominence_ratio, smooth_width)


# --------------------------------------------------------------------------
# feature CSV: id,prominence,residual,distance,label

def write_features_csv(fh, rows):
    """``rows`` yields ``(id, GaitFeatures, label_or_empty)``.

    Floats are written with ``repr`` so a read-back is exact.
    """
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["id", *FEATURE_NAMES, "label"])
    for rid, f, label in rows:
        w.writerow([rid, repr(f.avg_peak_prominence), repr(f.rms_residual),
                    repr(f.avg_peak_distance), label or ""])


def read_features_csv(fh):
    """Return ``(ids, X, labels)`` with X shaped ``(n, 3)``."""
    reader = csv.DictReader(fh)
    missing = {"id", *FEATURE_NAMES, "label"} - set(reader.fieldnames or ())
    if missing:
        raise ParseError(f"feature CSV lacks columns: {sorted(missing)}")
    ids, rows, labels = [], [], []
    for line in reader:
        try:
            rows.append([float(line[k]) for k in FEATURE_NAMES])
        except ValueError as exc:
            raise ParseError(f"row {line['id']!r}: {exc}") from exc
        ids.append(line["id"])
        labels.append(line["label"] or None)
    X = np.array(rows, dtype=np.float64).reshape(-1, 3)
    if not np.all(np.isfinite(X)):
        raise InvalidInput("feature CSV contains non-finite values")
    return ids, X, labels
