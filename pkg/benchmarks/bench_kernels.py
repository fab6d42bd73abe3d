"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times peak finding, prominence and the tree split search directly, then a
full ``train`` run with each backend swapped in.
"""
import argparse
import time

import numpy as np

from gaittriage import _backend, _kernels_py
from gaittriage.classifier import TrainConfig, train

try:
    from gaittriage import _kernels as _compiled
except ImportError:
    _compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(rng):
    signals = [np.cumsum(rng.normal(size=int(n))) for n in rng.integers(150, 400, 300)]
    peaks = [_kernels_py.peak_candidates(s) for s in signals]
    X = rng.normal(size=(400, 3))
    y = (X[:, 0] + 0.5 * rng.normal(size=400) > 0).astype(np.int64)
    w = rng.integers(0, 3, 400).astype(np.float64)
    return signals, peaks, X, y, w


def bench(kern, data, repeat):
    signals, peaks, X, y, w = data
    return {
        "peak_candidates x300": best_of(lambda: [kern.peak_candidates(s) for s in signals], repeat),
        "prominences x300": best_of(
            lambda: [kern.prominences(s, p) for s, p in zip(signals, peaks)], repeat),
        "best_split x200": best_of(lambda: [kern.best_split(X, y, w) for _ in range(200)], repeat),
    }


def bench_train(kern, X, labels, repeat):
    saved = _backend.kernels
    _backend.kernels = kern
    try:
        return best_of(lambda: train(X, labels, TrainConfig(n_folds=10, seed=0)), repeat)
    finally:
        _backend.kernels = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    data = workloads(rng)
    X = rng.normal(size=(320, 3))
    labels = ["GoodGait" if v > 0 else "BadGait" for v in X[:, 0] + 0.7 * rng.normal(size=320)]

    backends = [("python", _kernels_py)]
    if _compiled is not None:
        backends.insert(0, ("cython", _compiled))
    else:
        print("compiled extension not built; timing the fallback only")
    results = {name: bench(k, data, args.repeat) for name, k in backends}
    for name, k in backends:
        results[name]["train (10-fold sweep)"] = bench_train(k, X, labels, max(1, args.repeat // 2))

    rows = list(results[backends[0][0]])
    head = f"{'kernel':<24}" + "".join(f"{n:>12}" for n, _ in backends)
    if len(backends) == 2:
        head += f"{'speedup':>10}"
    print(head)
    for r in rows:
        line = f"{r:<24}" + "".join(f"{results[n][r] * 1e3:>10.1f}ms" for n, _ in backends)
        if len(backends) == 2:
            line += f"{results['python'][r] / results['cython'][r]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
