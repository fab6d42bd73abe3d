"""Select the kernel implementation at import time.

The compiled extension is used when it was built; set ``GAITTRIAGE_PURE=1``
to force the numpy fallback.
"""
import os

import numpy as np

from . import _kernels_py

kernels = _kernels_py
NAME = "python"

if os.environ.get("GAITTRIAGE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        NAME = "cython"


def peak_candidates(x):
    return kernels.peak_candidates(np.ascontiguousarray(x, dtype=np.float64))


def prominences(x, peaks):
    return kernels.prominences(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(peaks, dtype=np.int64),
    )


def best_split(X, y, w):
    return kernels.best_split(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int64),
        np.ascontiguousarray(w, dtype=np.float64),
    )
