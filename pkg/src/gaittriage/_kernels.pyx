# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: peak candidates, prominences and Gini split search.

Every function here has a drop-in twin in ``_kernels_py`` that must return
identical results; ``_backend`` picks one at import.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def peak_candidates(const double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i = 1, ahead
    cdef Py_ssize_t i_max = n - 1
    out = np.empty(n // 2 + 1, dtype=np.int64)
    cdef long long[::1] o = out
    cdef Py_ssize_t count = 0
    while i < i_max:
        if x[i - 1] < x[i]:
            ahead = i + 1
            while ahead < i_max and x[ahead] == x[i]:
                ahead += 1
            if x[ahead] < x[i]:
                o[count] = (i + ahead - 1) // 2
                count += 1
                i = ahead
        i += 1
    return out[:count].copy()


def prominences(const double[::1] x, const long long[::1] peaks):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = peaks.shape[0]
    cdef Py_ssize_t k, j, p
    cdef double h, left_min, right_min
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    for k in range(m):
        p = peaks[k]
        h = x[p]
        left_min = h
        j = p - 1
        while j >= 0 and x[j] <= h:
            if x[j] < left_min:
                left_min = x[j]
            j -= 1
        right_min = h
        j = p + 1
        while j < n and x[j] <= h:
            if x[j] < right_min:
                right_min = x[j]
            j += 1
        o[k] = h - (left_min if left_min > right_min else right_min)
    return out


def best_split(const double[:, ::1] X, const long long[::1] y, const double[::1] w):
    """Return ``(feature, threshold, gain)`` of the best weighted-Gini split.

    ``feature`` is -1 when no split lowers impurity. Ties keep the first
    feature and the lowest threshold.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t f, i, a, b
    cdef double W = 0.0, P = 0.0, Q
    cdef double wl, pl, ql, wr, pr, qr, child, parent, gain
    cdef double best_gain = 0.0, best_thr = 0.0, lo, hi, mid
    cdef Py_ssize_t best_f = -1
    cdef long long[::1] order
    for i in range(n):
        W += w[i]
        if y[i] == 1:
            P += w[i]
    Q = W - P
    if W <= 0.0:
        return -1, 0.0, 0.0
    parent = W - (P * P + Q * Q) / W
    for f in range(d):
        order = np.argsort(np.asarray(X[:, f]), kind="stable").astype(np.int64)
        wl = 0.0
        pl = 0.0
        for i in range(n - 1):
            a = order[i]
            b = order[i + 1]
            wl = wl + w[a]
            if y[a] == 1:
                pl = pl + w[a]
            if X[a, f] == X[b, f]:
                continue
            wr = W - wl
            if wl <= 0.0 or wr <= 0.0:
                continue
            ql = wl - pl
            pr = P - pl
            qr = wr - pr
            child = (wl - (pl * pl + ql * ql) / wl) + (wr - (pr * pr + qr * qr) / wr)
            gain = (parent - child) / W
            if gain > best_gain:
                lo = X[a, f]
                hi = X[b, f]
                mid = lo + (hi - lo) / 2.0
                if mid >= hi:
                    mid = lo
                best_gain = gain
                best_thr = mid
                best_f = f
    return best_f, best_thr, best_gain
