"""Plot-ready data: the feature scatter and per-window energy traces."""
from __future__ import annotations

import csv
import io

import numpy as np

from .errors import EmptyInput
from .features import FEATURE_NAMES
from .peaks import peak_arrays
from .spectro import EnergySignal


def scatter_csv(ids, X, labels) -> str:
    """Feature rows grouped by label (unlabelled rows last), ids sorted
    within each group."""
    if len(ids) == 0:
        raise EmptyInput("no feature rows to report")
    order = sorted(range(len(ids)), key=lambda i: (labels[i] is None, labels[i] or "", ids[i]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", *FEATURE_NAMES, "id"])
    for i in order:
        w.writerow([labels[i] or "", *(repr(float(v)) for v in X[i]), ids[i]])
    return buf.getvalue()


def energy_csv(E: EnergySignal, min_prominence: float) -> str:
    idx, prom = peak_arrays(E.values, min_prominence)
    prom_at = dict(zip(idx.tolist(), prom.tolist()))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["frame", "time_s", "energy", "is_peak", "prominence"])
    for i, v in enumerate(E.values):
        p = prom_at.get(i)
        w.writerow([i, repr(i * E.frame_period_s), repr(float(v)), int(p is not None),
                    "" if p is None else repr(p)])
    return buf.getvalue()


def scatter_svg(X, labels) -> str:
    """Three pairwise projections of the feature cloud, coloured by label."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    X = np.asarray(X)
    pairs = [(0, 1), (0, 2), (1, 2)]
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    groups = sorted({lab or "unlabelled" for lab in labels})
    for ax, (a, b) in zip(axes, pairs):
        for g in groups:
            m = np.array([(lab or "unlabelled") == g for lab in labels])
            ax.scatter(X[m, a], X[m, b], s=8, label=g, alpha=0.7)
        ax.set_xlabel(FEATURE_NAMES[a])
        ax.set_ylabel(FEATURE_NAMES[b])
    axes[0].legend()
    fig.tight_layout()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()
