"""Pure numpy twins of the compiled kernels in ``_kernels.pyx``.

Results must match the compiled versions bit for bit; the test suite runs
both against each other.
"""
import numpy as np


def peak_candidates(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < 3:
        return np.empty(0, dtype=np.int64)
    # collapse runs of equal values, a plateau is then a single run
    change = np.flatnonzero(x[1:] != x[:-1])
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [n - 1]))
    vals = x[starts]
    if vals.shape[0] < 3:
        return np.empty(0, dtype=np.int64)
    inner = (vals[1:-1] > vals[:-2]) & (vals[1:-1] > vals[2:])
    k = np.flatnonzero(inner) + 1
    return ((starts[k] + ends[k]) // 2).astype(np.int64)


def prominences(x, peaks):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(len(peaks), dtype=np.float64)
    for k, p in enumerate(peaks):
        h = x[p]
        higher = np.flatnonzero(x[:p] > h)
        lo = higher[-1] + 1 if higher.size else 0
        higher = np.flatnonzero(x[p + 1:] > h)
        hi = p + 1 + higher[0] if higher.size else x.shape[0]
        left_min = x[lo:p + 1].min()
        right_min = x[p:hi].min()
        out[k] = h - max(left_min, right_min)
    return out


def best_split(X, y, w):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n, d = X.shape
    pos = y == 1
    if n == 0:
        return -1, 0.0, 0.0
    # sequential sums, same order as the compiled loop
    W = float(np.cumsum(w)[-1])
    P = float(np.cumsum(np.where(pos, w, 0.0))[-1])
    Q = W - P
    if W <= 0.0:
        return -1, 0.0, 0.0
    parent = W - (P * P + Q * Q) / W
    best_f, best_thr, best_gain = -1, 0.0, 0.0
    if n < 2:
        return best_f, best_thr, best_gain
    for f in range(d):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ws = w[order]
        wl = np.cumsum(ws)[:-1]
        pl = np.cumsum(np.where(pos[order], ws, 0.0))[:-1]
        wr = W - wl
        ok = (xs[:-1] != xs[1:]) & (wl > 0.0) & (wr > 0.0)
        if not ok.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            ql = wl - pl
            pr = P - pl
            qr = wr - pr
            child = (wl - (pl * pl + ql * ql) / wl) + (wr - (pr * pr + qr * qr) / wr)
            gain = (parent - child) / W
        gain = np.where(ok, gain, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            lo, hi = xs[i], xs[i + 1]
            mid = lo + (hi - lo) / 2.0
            if mid >= hi:
                mid = lo
            best_f, best_thr, best_gain = f, float(mid), float(gain[i])
    return best_f, best_thr, best_gain
