import struct
import wave

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaittriage.audio_io import (AudioClip, GateConfig, GateSegment, calibrate_threshold,
                                 frame_rms, gated_duration, load_wav, rms_gate, write_wav,
                                 write_segments_csv)
from gaittriage.errors import EmptyInput, InvalidInput, InvalidParams, ParseError, UnsupportedFormat

from conftest import make_clip


def _wav_bytes(tag, channels, rate, bits, payload, extensible=False):
    block = channels * bits // 8
    if extensible:
        fmt = struct.pack("<HHIIHH", 0xFFFE, channels, rate, rate * block, block, bits)
        fmt += struct.pack("<HHI", 22, bits, 0) + struct.pack("<H", tag) + b"\x00" * 14
    else:
        fmt = struct.pack("<HHIIHH", tag, channels, rate, rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


def _write(tmp_path, name, data):
    p = tmp_path / name
    p.write_bytes(data)
    return p


def test_pcm16_scaling(tmp_path):
    payload = np.array([0, 16384, -16384], dtype="<i2").tobytes()
    clip = load_wav(_write(tmp_path, "a.wav", _wav_bytes(1, 1, 16000, 16, payload)))
    np.testing.assert_allclose(clip.samples, [0.0, 0.5, -0.5])
    assert clip.sample_rate_hz == 16000


def test_stereo_is_averaged(tmp_path):
    payload = np.array([1.0, 0.0, 1.0, 0.0], dtype="<f4").tobytes()
    clip = load_wav(_write(tmp_path, "s.wav", _wav_bytes(3, 2, 16000, 32, payload)))
    np.testing.assert_allclose(clip.samples, [0.5, 0.5])


def test_thirty_second_batch(tmp_path):
    p = tmp_path / "batch.wav"
    write_wav(p, make_clip(np.zeros(30 * 16000)))
    assert len(load_wav(p)) == 480000


@pytest.mark.parametrize("bits,dtype,scale", [(8, np.uint8, None), (24, None, 1 << 23),
                                              (32, "<i4", 1 << 31)])
def test_other_integer_widths(tmp_path, bits, dtype, scale):
    if bits == 8:
        payload = np.array([128, 192, 64], dtype=np.uint8).tobytes()
        expected = [0.0, 0.5, -0.5]
    elif bits == 24:
        vals = [0, 1 << 22, -(1 << 22)]
        payload = b"".join(int(v).to_bytes(3, "little", signed=True) for v in vals)
        expected = [0.0, 0.5, -0.5]
    else:
        payload = np.array([0, 1 << 30, -(1 << 30)], dtype=dtype).tobytes()
        expected = [0.0, 0.5, -0.5]
    clip = load_wav(_write(tmp_path, "w.wav", _wav_bytes(1, 1, 16000, bits, payload)))
    np.testing.assert_allclose(clip.samples, expected)


def test_extensible_header(tmp_path):
    payload = np.array([0, 16384], dtype="<i2").tobytes()
    clip = load_wav(_write(tmp_path, "x.wav", _wav_bytes(1, 1, 16000, 16, payload, True)))
    np.testing.assert_allclose(clip.samples, [0.0, 0.5])


def test_native_rate_is_kept_and_can_be_required(tmp_path):
    payload = np.zeros(100, dtype="<i2").tobytes()
    p = _write(tmp_path, "r.wav", _wav_bytes(1, 1, 44100, 16, payload))
    clip = load_wav(p)
    assert clip.sample_rate_hz == 44100 and not clip.is_canonical
    with pytest.raises(InvalidInput):
        load_wav(p, require_rate=16000)


def test_errors(tmp_path):
    with pytest.raises(ParseError):
        load_wav(_write(tmp_path, "junk.wav", b"not a wav file at all"))
    with pytest.raises(UnsupportedFormat):
        load_wav(_write(tmp_path, "alaw.wav", _wav_bytes(6, 1, 8000, 8, b"\x01\x02")))
    with pytest.raises(EmptyInput):
        load_wav(_write(tmp_path, "empty.wav", _wav_bytes(1, 1, 16000, 16, b"")))
    truncated = _wav_bytes(1, 1, 16000, 16, b"\x00" * 20)[:30]
    with pytest.raises(ParseError):
        load_wav(_write(tmp_path, "trunc.wav", truncated))


def test_write_read_roundtrip(tmp_path, rng):
    x = rng.uniform(-0.9, 0.9, 1000)
    write_wav(tmp_path / "rt.wav", make_clip(x))
    with wave.open(str(tmp_path / "rt.wav")) as fh:
        assert fh.getsampwidth() == 2 and fh.getnchannels() == 1
    np.testing.assert_allclose(load_wav(tmp_path / "rt.wav").samples, x, atol=1 / 32768)


# --- frame RMS --------------------------------------------------------------

def test_frame_rms_examples():
    np.testing.assert_array_equal(frame_rms(make_clip(np.full(16, 0.5)), 4, 4), [0.5] * 4)
    np.testing.assert_array_equal(frame_rms(make_clip(np.zeros(12)), 4, 4), [0.0] * 3)
    assert frame_rms(make_clip([1, -1, 1, -1]), 4, 4).tolist() == [1.0]


def test_frame_rms_drops_partial_frame_and_errors():
    assert frame_rms(make_clip(np.ones(10)), 4, 3).shape == (3,)
    with pytest.raises(EmptyInput):
        frame_rms(make_clip(np.ones(3)), 4, 4)


@given(st.lists(st.floats(-1, 1), min_size=8, max_size=200))
def test_frame_rms_sign_invariant(xs):
    x = np.array(xs)
    np.testing.assert_array_equal(frame_rms(make_clip(x), 8, 3), frame_rms(make_clip(-x), 8, 3))


# --- gate -----------------------------------------------------------------------

def test_gate_silence():
    assert rms_gate(make_clip(np.zeros(16000)), GateConfig(0.01, 1600, 5)) == []


def test_gate_loud_block_exact_span():
    frame = 100
    x = np.zeros(40 * frame)
    x[10 * frame:20 * frame] = 0.5
    segs = rms_gate(make_clip(x), GateConfig(0.1, frame, 0))
    # direct scan oracle over frames
    loud = [k for k in range(40) if np.sqrt(np.mean(x[k * frame:(k + 1) * frame] ** 2)) >= 0.1]
    assert loud == list(range(10, 20))
    assert segs == [GateSegment(10 * frame, 20 * frame)]


def test_gate_hang_time_extends_and_merges():
    frame = 10
    x = np.zeros(30 * frame)
    x[2 * frame:3 * frame] = 0.5
    x[6 * frame:7 * frame] = 0.5
    assert rms_gate(make_clip(x), GateConfig(0.1, frame, 2)) == [GateSegment(20, 50), GateSegment(60, 90)]
    assert rms_gate(make_clip(x), GateConfig(0.1, frame, 3)) == [GateSegment(20, 100)]


def test_gate_zero_threshold_spans_clip():
    x = np.zeros(1050)
    assert rms_gate(make_clip(x), GateConfig(0.0, 100, 0)) == [GateSegment(0, 1050)]


def test_gate_config_validation():
    with pytest.raises(InvalidParams):
        GateConfig(-1.0)
    with pytest.raises(InvalidParams):
        GateConfig(0.1, 0)


def _bursty(seed):
    r = np.random.default_rng(seed)
    x = r.normal(0, 0.01, 20 * 400)
    for _ in range(r.integers(1, 5)):
        s = r.integers(0, 18) * 400
        x[s:s + r.integers(200, 1200)] += r.normal(0, r.uniform(0.05, 0.4), 1)[0]
    return np.clip(x, -1, 1)


@given(st.integers(0, 10_000), st.integers(0, 4))
@settings(max_examples=60, deadline=None)
def test_gate_redetects_concatenated_segments(seed, hang):
    clip = make_clip(_bursty(seed))
    cfg = GateConfig(0.05, 400, hang)
    segs = rms_gate(clip, cfg)
    if not segs:
        return
    joined = np.concatenate([clip.samples[s.start_sample:s.end_sample] for s in segs])
    again = rms_gate(make_clip(joined), cfg)
    covered = np.zeros(len(joined), dtype=bool)
    for s in again:
        covered[s.start_sample:s.end_sample] = True
    assert covered.all()


@given(st.integers(0, 10_000), st.floats(0, 0.5), st.floats(0, 0.5))
@settings(max_examples=60, deadline=None)
def test_gate_monotone_in_threshold(seed, t1, t2):
    clip = make_clip(_bursty(seed))
    lo, hi = sorted((t1, t2))
    d_lo = gated_duration(rms_gate(clip, GateConfig(lo, 400, 2)))
    d_hi = gated_duration(rms_gate(clip, GateConfig(hi, 400, 2)))
    assert d_hi <= d_lo


# --- calibration --------------------------------------------------------------

def _sorted_percentile(values, q):
    v = sorted(values)
    rank = q / 100 * (len(v) - 1)
    lo = int(np.floor(rank))
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (v[hi] - v[lo]) * (rank - lo)


def test_calibrate_constant():
    clip = make_clip(np.full(20 * 100, 0.2))
    assert calibrate_threshold(clip, 37.0, 100) == pytest.approx(0.2)


def test_calibrate_against_sorted_oracle():
    x = np.concatenate([np.full(90 * 100, 0.1), np.full(10 * 100, 0.9)])
    clip = make_clip(x)
    rms = frame_rms(clip, 100, 100)
    for q in (95.0, 90.5, 50.0, 89.2):
        assert calibrate_threshold(clip, q, 100) == pytest.approx(_sorted_percentile(rms, q), abs=1e-12)
    assert 0.1 - 1e-12 <= calibrate_threshold(clip, 95.0, 100) <= 0.9 + 1e-12
    assert calibrate_threshold(clip, 100.0, 100) == pytest.approx(rms.max())


def test_calibrate_short_clip():
    with pytest.raises(EmptyInput):
        calibrate_threshold(make_clip(np.ones(900)), 95, 100)


def test_segments_csv(tmp_path):
    write_segments_csv(tmp_path / "g.csv", "dev1", [GateSegment(0, 10), GateSegment(20, 30)])
    assert (tmp_path / "g.csv").read_text().splitlines() == [
        "source_id,start_sample,end_sample", "dev1,0,10", "dev1,20,30"]


def test_audioclip_invariants():
    with pytest.raises(InvalidInput):
        AudioClip(np.array([np.nan]), 16000)
    with pytest.raises(InvalidInput):
        AudioClip(np.zeros(4), 0)
    assert AudioClip(np.array([2.0, -3.0]), 16000).samples.tolist() == [1.0, -1.0]
