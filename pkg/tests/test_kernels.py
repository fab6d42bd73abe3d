"""The compiled kernels and their numpy twins must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaittriage import _backend, _kernels_py

compiled = pytest.importorskip("gaittriage._kernels")

int_signals = arrays(np.float64, st.integers(1, 80), elements=st.integers(0, 6).map(float))
float_signals = arrays(np.float64, st.integers(1, 80),
                       elements=st.floats(-1e6, 1e6, allow_nan=False))


@given(st.one_of(int_signals, float_signals))
@settings(max_examples=300, deadline=None)
def test_peak_candidates_match(x):
    a = compiled.peak_candidates(np.ascontiguousarray(x))
    b = _kernels_py.peak_candidates(x)
    np.testing.assert_array_equal(a, b)


@given(st.one_of(int_signals, float_signals))
@settings(max_examples=300, deadline=None)
def test_prominences_match(x):
    peaks = _kernels_py.peak_candidates(x)
    a = compiled.prominences(np.ascontiguousarray(x), peaks)
    b = _kernels_py.prominences(x, peaks)
    assert a.tobytes() == b.tobytes()


@given(st.integers(2, 60), st.integers(1, 4), st.integers(0, 2**32 - 1), st.booleans())
@settings(max_examples=200, deadline=None)
def test_best_split_match(n, d, seed, discrete):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, (n, d)).astype(float) if discrete else rng.normal(size=(n, d))
    y = rng.integers(0, 2, n).astype(np.int64)
    w = rng.integers(1, 4, n).astype(float)
    a = compiled.best_split(X, y, w)
    b = _kernels_py.best_split(X, y, w)
    assert a[0] == b[0]
    assert a[1] == b[1]
    assert a[2] == b[2]


def test_backend_follows_environment():
    import os
    forced = os.environ.get("GAITTRIAGE_PURE", "") in ("1", "true", "yes")
    assert _backend.NAME == ("python" if forced else "cython")


def test_best_split_separable():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 1, 1])
    w = np.ones(4)
    for k in (compiled, _kernels_py):
        f, thr, gain = k.best_split(X, y, w)
        assert f == 0 and thr == 1.5
        assert gain == pytest.approx(0.5)


def test_best_split_pure_node_has_no_split():
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([1, 1, 1])
    for k in (compiled, _kernels_py):
        assert k.best_split(X, y, np.ones(3))[0] == -1
