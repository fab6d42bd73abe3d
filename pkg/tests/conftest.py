import numpy as np
import pytest

from gaittriage.audio_io import AudioClip
from gaittriage.manifest import read_manifest
from gaittriage.synth import synth_dataset
from gaittriage.triage import TriageParams, extract_manifest

ACCEPTANCE_RESULTS = []


def record(number, name, passed, detail=""):
    ACCEPTANCE_RESULTS.append((number, name, bool(passed), detail))
    line = f"[{number:>2}] {'PASS' if passed else 'FAIL'}  {name}"
    print(line + (f"  ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(
            f"[{number:>2}] {'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_clip(samples, rate=16000):
    return AudioClip(np.asarray(samples, dtype=np.float64), rate, "test")


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """20 good + 20 bad synthetic clips on disk plus their window features."""
    root = tmp_path_factory.mktemp("small")
    manifest = synth_dataset(root, 20, 20, seed=3)
    windows, _ = extract_manifest(read_manifest(manifest), root, TriageParams())
    return manifest, windows
