"""Local maxima and their topographic prominence in 1-D signals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidInput


@dataclass(frozen=True)
class Peak:
    index: int
    height: float
    prominence: float


def _as_signal(signal):
    x = np.ascontiguousarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInput("signal must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("signal contains NaN or Inf")
    return x


def find_peaks(signal, min_prominence: float = 0.0) -> list[Peak]:
    """Find interior local maxima whose prominence reaches ``min_prominence``.

    A peak is strictly higher than both neighbours. A flat top (run of equal
    values with lower values on both sides) counts once, at its middle
    sample, taking the left one of the two middles on even-length runs. The
    first and last samples are never peaks.
    """
    x = _as_signal(signal)
    idx = _backend.peak_candidates(x)
    if idx.size == 0:
        return []
    prom = _backend.prominences(x, idx)
    keep = prom >= min_prominence
    return [Peak(int(i), float(x[i]), float(p)) for i, p in zip(idx[keep], prom[keep])]


def peak_arrays(signal, min_prominence: float = 0.0):
    """Array form of :func:`find_peaks`: ``(indices, prominences)``."""
    x = _as_signal(signal)
    idx = _backend.peak_candidates(x)
    prom = _backend.prominences(x, idx) if idx.size else np.empty(0)
    keep = prom >= min_prominence
    return idx[keep], prom[keep]


def prominence(signal, peak_index: int) -> float:
    """Height of a peak above the higher of its two bases.

    Each base is the lowest sample between the peak and the first strictly
    higher sample on that side (or the signal edge).
    """
    x = _as_signal(signal)
    cands = _backend.peak_candidates(x)
    if peak_index not in set(cands.tolist()):
        raise InvalidInput(f"index {peak_index} is not a peak")
    return float(_backend.prominences(x, np.array([peak_index]))[0])


def peak_distances(peaks) -> np.ndarray:
    idx = np.array([p.index if isinstance(p, Peak) else p for p in peaks], dtype=np.int64)
    if idx.size < 2:
        return np.empty(0, dtype=np.int64)
    return np.diff(idx)


def smooth(signal, width: int) -> np.ndarray:
    """Centered moving average; ``width <= 1`` returns the signal unchanged.

    Off by default in feature extraction, peaks are found on the raw energy
    signal.
    """
    x = np.asarray(signal, dtype=np.float64)
    if width <= 1:
        return x
    kernel = np.ones(width) / width
    padded = np.pad(x, (width // 2, width - 1 - width // 2), mode="edge")
    return np.convolve(padded, kernel, mode="valid")
