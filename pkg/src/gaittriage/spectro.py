"""Mel spectrograms in dB and the per-frame energy signal.

Power spectra come from Hann-windowed frames without centering or padding.
Mel filters are unnormalized triangles (peak weight 1) on the HTK mel
scale. dB values are absolute (10*log10 of mel power, floored at 1e-10)
and then clamped to ``db_floor`` below the clip's own peak.
"""
from __future__ import annotations

import io
from dataclasses import asdict, dataclass, field

import numpy as np

from .audio_io import AudioClip
from .errors import EmptyInput, InvalidParams, ParseError

EPS = 1e-10


@dataclass(frozen=True)
class SpectroParams:
    n_fft: int = 1024
    hop: int = 256
    n_mels: int = 64
    fmin_hz: float = 40.0
    fmax_hz: float = 8000.0
    db_floor: float = 80.0

    def validate(self, sample_rate_hz):
        if self.n_fft < 2 or self.hop < 1 or self.n_mels < 1:
            raise InvalidParams("n_fft >= 2, hop >= 1 and n_mels >= 1 required")
        if not 0 <= self.fmin_hz < self.fmax_hz <= sample_rate_hz / 2:
            raise InvalidParams(
                f"need 0 <= fmin < fmax <= {sample_rate_hz / 2} Hz, got "
                f"{self.fmin_hz}..{self.fmax_hz}")
        if self.db_floor is not None and self.db_floor <= 0:
            raise InvalidParams("db_floor must be positive (or None to disable)")


@dataclass(frozen=True)
class MelSpectrogram:
    values: np.ndarray = field(repr=False)  # [frame, mel bin]
    params: SpectroParams
    sample_rate_hz: int = 16000

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def frame_period_s(self) -> float:
        return self.params.hop / self.sample_rate_hz


@dataclass(frozen=True)
class EnergySignal:
    values: np.ndarray = field(repr=False)
    frame_period_s: float

    def __len__(self):
        return self.values.shape[0]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def stft_power(clip: AudioClip, params: SpectroParams) -> np.ndarray:
    """|rFFT|^2 of Hann-windowed frames, shape ``(n_frames, n_fft // 2 + 1)``."""
    x = clip.samples
    if len(x) < params.n_fft:
        raise EmptyInput(f"clip of {len(x)} samples is shorter than n_fft={params.n_fft}")
    window = np.hanning(params.n_fft + 1)[:-1]  # periodic Hann
    frames = np.lib.stride_tricks.sliding_window_view(x, params.n_fft)[:: params.hop]
    spec = np.fft.rfft(frames * window, axis=1)
    return spec.real ** 2 + spec.imag ** 2


def mel_filterbank(params: SpectroParams, sample_rate_hz: int) -> np.ndarray:
    params.validate(sample_rate_hz)
    n_bins = params.n_fft // 2 + 1
    fft_freqs = np.arange(n_bins) * sample_rate_hz / params.n_fft
    edges = mel_to_hz(np.linspace(hz_to_mel(params.fmin_hz), hz_to_mel(params.fmax_hz),
                                  params.n_mels + 2))
    # pin the outer edges, the mel round trip is off by a few ulps
    edges[0], edges[-1] = params.fmin_hz, params.fmax_hz
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (fft_freqs - lower) / (center - lower)
    falling = (upper - fft_freqs) / (upper - center)
    fb = np.maximum(0.0, np.minimum(rising, falling))
    empty = np.flatnonzero(fb.max(axis=1) <= 0.0)
    if empty.size:
        raise InvalidParams(
            f"n_mels={params.n_mels} too large for n_fft={params.n_fft}: "
            f"{empty.size} filter(s) cover no FFT bin")
    return fb


def power_to_db(power, db_floor):
    db = 10.0 * np.log10(np.maximum(power, EPS))
    if db_floor is not None:
        peak = db.max()
        db = np.clip(db, peak - db_floor, peak)
    return db


def melspectrogram_db(clip: AudioClip, params: SpectroParams | None = None,
                      filterbank: np.ndarray | None = None) -> MelSpectrogram:
    params = params or SpectroParams()
    if filterbank is None:
        filterbank = mel_filterbank(params, clip.sample_rate_hz)
    power = stft_power(clip, params)
    mel = power @ filterbank.T
    return MelSpectrogram(power_to_db(mel, params.db_floor), params, clip.sample_rate_hz)


def energy_signal(mel: MelSpectrogram) -> EnergySignal:
    """Sum the dB values of every frame across mel bins."""
    return EnergySignal(np.asarray(mel.values, dtype=np.float64).sum(axis=1),
                        mel.frame_period_s)


def write_mel_csv(fh, mel: MelSpectrogram):
    """Write a melspectrogram as CSV: one ``# key=value`` header line, then
    one row per frame."""
    head = dict(asdict(mel.params), sample_rate_hz=mel.sample_rate_hz)
    fh.write("# " + ",".join(f"{k}={v}" for k, v in head.items()) + "\n")
    for row in mel.values:
        fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_mel_csv(fh) -> MelSpectrogram:
    first = fh.readline()
    if not first.startswith("# "):
        raise ParseError("melspectrogram CSV must start with a '# key=value' header")
    try:
        head = dict(kv.split("=", 1) for kv in first[2:].strip().split(","))
        rate = int(head.pop("sample_rate_hz"))
        floor = head.pop("db_floor")
        params = SpectroParams(
            n_fft=int(head["n_fft"]), hop=int(head["hop"]), n_mels=int(head["n_mels"]),
            fmin_hz=float(head["fmin_hz"]), fmax_hz=float(head["fmax_hz"]),
            db_floor=None if floor == "None" else float(floor))
        values = np.loadtxt(io.StringIO(fh.read()), delimiter=",", ndmin=2)
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad melspectrogram CSV: {exc}") from exc
    if values.shape[1] != params.n_mels:
        raise ParseError("column count does not match n_mels")
    return MelSpectrogram(values, params, rate)
