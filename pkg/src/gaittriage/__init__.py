"""Acoustic gait triage: energy-signal peak features and a small ensemble
filter that separates clean gait windows from noisy ones."""
from ._backend import NAME as KERNEL_BACKEND
from .audio_io import (AudioClip, GateConfig, GateSegment, calibrate_threshold, frame_rms,
                       load_wav, rms_gate, write_wav)
from .features import (GaitFeatures, avg_peak_distance, avg_peak_prominence,
                       extract_features, rms_residual)
from .peaks import Peak, find_peaks, peak_distances, prominence
from .spectro import (EnergySignal, MelSpectrogram, SpectroParams, energy_signal,
                      mel_filterbank, melspectrogram_db, stft_power)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "AudioClip", "GateConfig", "GateSegment", "calibrate_threshold",
    "frame_rms", "load_wav", "rms_gate", "write_wav", "GaitFeatures", "avg_peak_distance",
    "avg_peak_prominence", "extract_features", "rms_residual", "Peak", "find_peaks",
    "peak_distances", "prominence", "EnergySignal", "MelSpectrogram", "SpectroParams",
    "energy_signal", "mel_filterbank", "melspectrogram_db", "stft_power",
]
