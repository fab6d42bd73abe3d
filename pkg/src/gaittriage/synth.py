"""Synthetic gait scenes with known footstep times and quality labels.

A scene is a train of decaying band-limited noise bursts (footsteps) over
pink background noise, optionally with distractor events: door-shut-like
broadband bursts and speech-band harmonic tones. Scenes are labelled
GoodGait when clean (SNR >= 10 dB, no distractors) and BadGait when noisy
(SNR <= 0 dB) or polyphonic (3+ distractors). Specs in between are refused
so the two classes never overlap.

Each scene draws footsteps, background and distractors from separate RNG
streams. Two specs that differ only in ``snr_db`` therefore give the same
events at different noise levels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import butter, sosfilt

from .audio_io import CANONICAL_RATE, AudioClip, write_wav
from .errors import InvalidParams
from .manifest import BAD, GAIT, GOOD, NON_GAIT, ManifestEntry, format_manifest
from ._fileutil import atomic_write

STEP_BAND_HZ = (100.0, 2000.0)
STEP_PEAK = 0.5
MAX_PEAK = 0.99


@dataclass(frozen=True)
class SceneSpec:
    duration_s: float = 3.0
    cadence_hz: float = 2.0
    step_jitter_frac: float = 0.05
    step_decay_ms: float = 30.0
    snr_db: float = 20.0
    distractors: int = 0
    seed: int = 0
    sample_rate_hz: int = CANONICAL_RATE
    with_steps: bool = True

    def validate(self):
        if not self.duration_s > 0:
            raise InvalidParams("duration_s must be positive")
        if not self.cadence_hz > 0:
            raise InvalidParams("cadence_hz must be positive")
        if not 0 <= self.step_jitter_frac < 0.5:
            raise InvalidParams("step_jitter_frac must be in [0, 0.5)")
        if not self.step_decay_ms > 0:
            raise InvalidParams("step_decay_ms must be positive")
        if self.distractors < 0:
            raise InvalidParams("distractors must be >= 0")
        if self.sample_rate_hz < 2 * STEP_BAND_HZ[1] + 1:
            raise InvalidParams("sample rate too low for the footstep band")
        if not np.isfinite(self.snr_db):
            raise InvalidParams("snr_db must be finite")


@dataclass(frozen=True)
class SynthScene:
    clip: AudioClip
    step_times_s: np.ndarray = field(repr=False)
    label: str | None


def quality_label(spec: SceneSpec) -> str:
    if spec.snr_db >= 10 and spec.distractors == 0:
        return GOOD
    if spec.snr_db <= 0 or spec.distractors >= 3:
        return BAD
    raise InvalidParams(
        f"snr_db={spec.snr_db}, distractors={spec.distractors} falls between the "
        "GoodGait and BadGait bands")


def _pink(rng, n):
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.arange(spec.shape[0], dtype=np.float64)
    f[0] = 1.0
    spec /= np.sqrt(f)
    spec[0] = 0.0
    x = np.fft.irfft(spec, n)
    return x / np.sqrt(np.mean(x * x))


def _decay_env(n, onset, decay_s, sr, attack_s=0.002):
    t = (np.arange(n) - onset) / sr
    env = np.where(t >= 0, np.exp(-np.maximum(t, 0) / decay_s), 0.0)
    return env * np.clip(t / attack_s, 0.0, 1.0)


def _steps(spec, rng, n):
    sr = spec.sample_rate_hz
    period = 1.0 / spec.cadence_hz
    count = int(np.floor(spec.duration_s * spec.cadence_hz + 1e-9))
    jitter = rng.uniform(-0.5, 0.5, count) * spec.step_jitter_frac * period
    times = period * (0.25 + np.arange(count)) + jitter
    times = times[(times >= 0) & (times < spec.duration_s)]
    amps = rng.uniform(0.7, 1.0, times.shape[0])
    sos = butter(4, STEP_BAND_HZ, btype="bandpass", fs=sr, output="sos")
    carrier = sosfilt(sos, rng.standard_normal(n))
    env = np.zeros(n)
    for t, a in zip(times, amps):
        env += a * _decay_env(n, int(round(t * sr)), spec.step_decay_ms / 1000.0, sr)
    track = carrier * env
    peak = np.max(np.abs(track)) if times.size else 0.0
    if peak > 0:
        track *= STEP_PEAK / peak
    return track, times


def _distractors(spec, rng, n):
    sr = spec.sample_rate_hz
    out = np.zeros(n)
    t = np.arange(n) / sr
    door_sos = butter(4, 4000.0, btype="lowpass", fs=sr, output="sos")
    for k in range(spec.distractors):
        onset = rng.uniform(0.0, spec.duration_s)
        if k % 2 == 0:
            # door shut: loud broadband thud with a longer tail
            burst = sosfilt(door_sos, rng.standard_normal(n))
            burst /= np.max(np.abs(burst)) or 1.0
            amp = rng.uniform(1.0, 2.0) * STEP_PEAK
            out += amp * burst * _decay_env(n, int(round(onset * sr)), 0.08, sr)
        else:
            # speech-like harmonic complex with a syllabic amplitude wobble
            f0 = rng.uniform(110.0, 240.0)
            dur = rng.uniform(0.4, 1.2)
            tone = sum(np.sin(2 * np.pi * h * f0 * t + rng.uniform(0, 2 * np.pi)) / h
                       for h in range(1, 9))
            gate = (t >= onset) & (t < onset + dur)
            shape = np.where(gate, np.sin(np.pi * np.clip((t - onset) / dur, 0, 1)), 0.0)
            wobble = 0.6 + 0.4 * np.sin(2 * np.pi * 4.0 * t)
            amp = rng.uniform(0.5, 1.0) * STEP_PEAK / 2.0
            out += amp * tone * shape * wobble
    return out


def synth_scene(spec: SceneSpec) -> SynthScene:
    """Render one scene.

    Returns the clip, the ground-truth footstep onsets in seconds and the
    quality label (None for scenes without footsteps).
    """
    spec.validate()
    label = quality_label(spec) if spec.with_steps else None
    n = int(round(spec.duration_s * spec.sample_rate_hz))
    step_ss, noise_ss, dist_ss = np.random.SeedSequence(spec.seed).spawn(3)
    if spec.with_steps:
        steps, times = _steps(spec, np.random.default_rng(step_ss), n)
        ref_power = np.mean(steps * steps)
    else:
        steps, times = np.zeros(n), np.empty(0)
        ref_power = 0.01
    noise = _pink(np.random.default_rng(noise_ss), n)
    noise *= np.sqrt(ref_power / 10.0 ** (spec.snr_db / 10.0))
    mix = steps + noise + _distractors(spec, np.random.default_rng(dist_ss), n)
    peak = np.max(np.abs(mix))
    if peak > MAX_PEAK:
        mix *= MAX_PEAK / peak
    return SynthScene(AudioClip(mix, spec.sample_rate_hz, f"synth-{spec.seed}"), times, label)


def _stratified(rng, lo, hi, n):
    """One draw per equal-width stratum of [lo, hi], in shuffled order."""
    u = (np.arange(n) + rng.uniform(0, 1, n)) / n
    return rng.permutation(lo + (hi - lo) * u)


def dataset_specs(n_good, n_bad, seed, duration_s=3.0, n_nongait=0):
    """Scene specs for a labelled dataset.

    Good scenes: SNR 10..25 dB, no distractors. Bad scenes: seven in eight are
    noisy (SNR -10..0 dB, 0..4 distractors), the rest polyphonic (SNR
    10..20 dB with 4..6 distractors). Cadence is 1.5..2.5 Hz throughout.
    Every range is sampled in equal-width strata.
    """
    if n_good < 1 or n_bad < 1 or n_nongait < 0:
        raise InvalidParams("need n_good >= 1 and n_bad >= 1")
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**31 - 1, n_good + n_bad + n_nongait)
    specs = []
    for snr, cad, s in zip(_stratified(rng, 10.0, 25.0, n_good),
                           _stratified(rng, 1.5, 2.5, n_good), seeds[:n_good]):
        specs.append(SceneSpec(duration_s=duration_s, cadence_hz=float(cad),
                               snr_db=float(snr), seed=int(s)))
    n_poly = n_bad // 8
    n_noisy = n_bad - n_poly
    bad_snr = np.concatenate((_stratified(rng, -10.0, 0.0, n_noisy),
                              _stratified(rng, 10.0, 20.0, n_poly)))
    bad_dist = np.concatenate((rng.integers(0, 5, n_noisy), rng.integers(4, 7, n_poly)))
    for snr, dist, cad, s in zip(bad_snr, bad_dist, _stratified(rng, 1.5, 2.5, n_bad),
                                 seeds[n_good:n_good + n_bad]):
        specs.append(SceneSpec(duration_s=duration_s, cadence_hz=float(cad),
                               snr_db=float(snr), distractors=int(dist), seed=int(s)))
    for s in seeds[n_good + n_bad:]:
        specs.append(SceneSpec(duration_s=duration_s, snr_db=0.0,
                               distractors=int(rng.integers(0, 4)), seed=int(s),
                               with_steps=False))
    return specs


def synth_dataset(out_dir, n_good, n_bad, seed, duration_s=3.0, n_nongait=0,
                  manifest_name="manifest.csv"):
    """Write WAV files and a CSV manifest under ``out_dir``.

    Returns the manifest path. The same arguments always give the same
    files, byte for byte.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    entries = []
    counters = {GOOD: 0, BAD: 0, None: 0}
    for spec in dataset_specs(n_good, n_bad, seed, duration_s, n_nongait):
        scene = synth_scene(spec)
        prefix = {GOOD: "good", BAD: "bad", None: "nongait"}[scene.label]
        name = f"{prefix}_{counters[scene.label]:04d}"
        counters[scene.label] += 1
        write_wav(out_dir / f"{name}.wav", scene.clip)
        entries.append(ManifestEntry(
            id=name, path=f"{name}.wav", start_s=0.0, end_s=len(scene.clip) / spec.sample_rate_hz,
            class_label=GAIT if spec.with_steps else NON_GAIT, quality_label=scene.label))
    path = out_dir / manifest_name
    atomic_write(path, format_manifest(entries))
    return path


