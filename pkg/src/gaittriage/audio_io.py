"""WAV loading, frame RMS and the RMS activity gate.

The gate decides which parts of a recording are worth processing: frames
whose RMS reaches a per-device threshold open it, and it stays open for
``hang_time`` frames after the level drops so a walk is not chopped up
between footsteps.
"""
from __future__ import annotations

import csv
import struct
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyInput, InvalidInput, InvalidParams, ParseError, UnsupportedFormat

CANONICAL_RATE = 16000

DEFAULT_GATE_FRAME = 1600
DEFAULT_HANG_TIME = 5
DEFAULT_PERCENTILE = 95.0

_PCM = 0x0001
_IEEE_FLOAT = 0x0003
_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray = field(repr=False)
    sample_rate_hz: int = CANONICAL_RATE
    source_id: str = ""

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1:
            raise InvalidInput("AudioClip samples must be 1-D (mono)")
        if not np.all(np.isfinite(x)):
            raise InvalidInput("AudioClip samples must be finite")
        if int(self.sample_rate_hz) <= 0:
            raise InvalidInput("sample_rate_hz must be positive")
        x = np.clip(x, -1.0, 1.0)
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    @property
    def is_canonical(self) -> bool:
        return self.sample_rate_hz == CANONICAL_RATE


@dataclass(frozen=True)
class GateConfig:
    rms_threshold: float = 0.01
    frame_len: int = DEFAULT_GATE_FRAME
    hang_time: int = DEFAULT_HANG_TIME

    def __post_init__(self):
        if not self.rms_threshold >= 0:
            raise InvalidParams("rms_threshold must be >= 0")
        if self.frame_len < 1:
            raise InvalidParams("frame_len must be >= 1")
        if self.hang_time < 0:
            raise InvalidParams("hang_time must be >= 0")


@dataclass(frozen=True)
class GateSegment:
    start_sample: int
    end_sample: int


# --------------------------------------------------------------------------
# WAV decoding

def _parse_fmt(body):
    if len(body) < 16:
        raise ParseError("fmt chunk too short")
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack("<HHIIHH", body[:16])
    if tag == _EXTENSIBLE:
        if len(body) < 40:
            raise ParseError("extensible fmt chunk too short")
        # first two bytes of the sub-format GUID carry the real format tag
        tag = struct.unpack("<H", body[24:26])[0]
    return tag, channels, rate, block_align, bits


def _iter_chunks(data):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack("<4sI", data[pos:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        yield cid, size, body
        pos += 8 + size + (size & 1)


def _decode(raw, tag, bits, channels):
    if tag == _PCM:
        if bits == 8:
            x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
        elif bits == 16:
            x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
        elif bits == 24:
            b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
            v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            v = np.where(v >= 1 << 23, v - (1 << 24), v)
            x = v.astype(np.float64) / float(1 << 23)
        elif bits == 32:
            x = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
        else:
            raise UnsupportedFormat(f"{bits}-bit integer PCM")
    elif tag == _IEEE_FLOAT:
        if bits == 32:
            x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        elif bits == 64:
            x = np.frombuffer(raw, dtype="<f8").astype(np.float64)
        else:
            raise UnsupportedFormat(f"{bits}-bit float")
        if not np.all(np.isfinite(x)):
            raise ParseError("non-finite float samples")
    else:
        raise UnsupportedFormat(f"WAV format tag 0x{tag:04x} (compressed or unknown)")
    return x.reshape(-1, channels).mean(axis=1)


def load_wav(path, require_rate=None) -> AudioClip:
    """Read a RIFF WAV file into a mono clip scaled to [-1, 1].

    Channels are averaged. No resampling is done: a clip at a non-canonical
    rate comes back at its native rate, unless ``require_rate`` is given, in
    which case a mismatch raises :class:`InvalidInput`.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ParseError(f"{path}: not a RIFF/WAVE file")
    fmt = None
    raw = None
    for cid, _size, body in _iter_chunks(data):
        if cid == b"fmt ":
            fmt = _parse_fmt(body)
        elif cid == b"data":
            raw = body
    if fmt is None:
        raise ParseError(f"{path}: missing fmt chunk")
    if raw is None:
        raise ParseError(f"{path}: missing data chunk")
    tag, channels, rate, block_align, bits = fmt
    if channels < 1 or rate < 1 or bits < 1:
        raise ParseError(f"{path}: invalid fmt fields")
    if tag in (_PCM, _IEEE_FLOAT) and block_align != channels * ((bits + 7) // 8):
        raise ParseError(f"{path}: block_align does not match channels/bits")
    if tag in (_PCM, _IEEE_FLOAT):
        # a truncated data chunk keeps its whole frames only
        raw = raw[: len(raw) - len(raw) % block_align]
    if len(raw) == 0 and tag in (_PCM, _IEEE_FLOAT):
        raise EmptyInput(f"{path}: no audio frames")
    samples = _decode(raw, tag, bits, channels)
    if samples.size == 0:
        raise EmptyInput(f"{path}: no audio frames")
    if require_rate is not None and rate != require_rate:
        raise InvalidInput(f"{path}: sample rate {rate} Hz, expected {require_rate} Hz")
    return AudioClip(samples, rate, source_id=str(path))


def write_wav(path, clip: AudioClip):
    """Write ``clip`` as mono 16-bit PCM."""
    pcm = np.round(np.clip(clip.samples, -1.0, 32767 / 32768) * 32768.0).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(clip.sample_rate_hz)
        fh.writeframes(pcm.tobytes())


# --------------------------------------------------------------------------
# RMS and gating

def frame_rms(clip: AudioClip, frame_len: int, hop: int) -> np.ndarray:
    if frame_len < 1 or hop < 1:
        raise InvalidParams("frame_len and hop must be >= 1")
    x = clip.samples
    if len(x) < frame_len:
        raise EmptyInput(f"clip of {len(x)} samples is shorter than one frame ({frame_len})")
    frames = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop]
    return np.sqrt(np.mean(frames * frames, axis=1))


def rms_gate(clip: AudioClip, cfg: GateConfig) -> list[GateSegment]:
    """Return the sample spans where the gate is open.

    Frames are non-overlapping (hop = frame_len). A run of frames at or above
    the threshold opens the gate; it closes ``hang_time`` frames after the
    run ends. Overlapping or touching spans are merged. When the last full
    frame is open, the trailing partial frame is included so the span
    reaches the end of the clip.
    """
    rms = frame_rms(clip, cfg.frame_len, cfg.frame_len)
    n_frames = rms.shape[0]
    active = rms >= cfg.rms_threshold
    if not active.any():
        return []
    open_ = active.copy()
    for lag in range(1, cfg.hang_time + 1):
        open_[lag:] |= active[:-lag]
    edges = np.diff(np.concatenate(([0], open_.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    n = len(clip)
    out = []
    for s, e in zip(starts, ends):
        start = int(s) * cfg.frame_len
        end = n if e == n_frames else min(int(e) * cfg.frame_len, n)
        out.append(GateSegment(start, end))
    return out


def gated_duration(segments) -> int:
    return sum(s.end_sample - s.start_sample for s in segments)


def calibrate_threshold(clip: AudioClip, percentile: float = DEFAULT_PERCENTILE,
                        frame_len: int = DEFAULT_GATE_FRAME) -> float:
    """Per-device threshold: a percentile of frame RMS over background audio."""
    if not 0 < percentile <= 100:
        raise InvalidParams("percentile must be in (0, 100]")
    if len(clip) < 10 * frame_len:
        raise EmptyInput("calibration clip must hold at least 10 frames")
    rms = frame_rms(clip, frame_len, frame_len)
    return float(np.percentile(rms, percentile, method="linear"))


def write_segments_csv(path, source_id, segments):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["source_id", "start_sample", "end_sample"])
        for s in segments:
            w.writerow([source_id, s.start_sample, s.end_sample])
