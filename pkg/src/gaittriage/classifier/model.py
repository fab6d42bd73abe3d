"""Training protocol, the fitted triage model and its file format.

Model selection mirrors an automated search with a fixed, auditable sweep:
every candidate is scored by mean macro-F1 over stratified k-fold CV, and
the final model is either the best candidate or a soft vote of the top
three weighted by their CV scores. Candidates run in ``CANDIDATES`` order
and the sweep stops early when the wall-clock budget runs out.

Labels are encoded 1 = GoodGait, 0 = BadGait; scores are P(GoodGait).
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import BudgetError, InvalidInput, ParseError
from ..features import FEATURE_NAMES, GaitFeatures
from ..manifest import BAD, GOOD
from .knn import KNN
from .metrics import Metrics, compute_metrics
from .tree import BaggedTrees

FORMAT = "gaittriage.model"
VERSION = 1

# fixed sweep order; cheap candidates first so a tight budget still yields a model
CANDIDATES = (
    [("knn", {"k": k, "metric": "euclidean"}) for k in (1, 3, 5, 9)]
    + [("bagged_trees", {"n_trees": t, "max_depth": d}) for t in (10, 50) for d in (2, 4, 8)]
)

_KINDS = {"knn": KNN, "bagged_trees": BaggedTrees}


@dataclass(frozen=True)
class TrainConfig:
    n_folds: int = 10
    seed: int = 0
    ensemble: bool = True
    top_k: int = 3
    time_budget_s: float = 300.0
    threshold: float = 0.5
    candidates: tuple = tuple((k, tuple(sorted(p.items()))) for k, p in CANDIDATES)

    def __post_init__(self):
        if self.n_folds < 2:
            raise InvalidInput("n_folds must be >= 2")
        if self.top_k < 1:
            raise InvalidInput("top_k must be >= 1")


@dataclass
class Component:
    name: str
    model: object
    weight: float


@dataclass
class TriageModel:
    components: list
    mean: np.ndarray
    std: np.ndarray
    threshold: float = 0.5
    metadata: dict = field(default_factory=dict)

    def standardize(self, X):
        return (X - self.mean) / self.std

    def predict_scores(self, X) -> np.ndarray:
        X = _as_matrix(X)
        Z = self.standardize(X)
        total = np.zeros(X.shape[0])
        for c in self.components:
            total += c.weight * c.model.predict_score(Z)
        return total

    def predict_labels(self, X):
        scores = self.predict_scores(X)
        return [GOOD if s >= self.threshold else BAD for s in scores], scores


def _name(kind, params):
    return f"{kind}(" + ",".join(f"{k}={v}" for k, v in sorted(params.items())) + ")"


def _as_matrix(X):
    if isinstance(X, GaitFeatures):
        X = [X.as_array()]
    X = np.asarray([f.as_array() if isinstance(f, GaitFeatures) else f for f in X],
                   dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(FEATURE_NAMES):
        raise InvalidInput(f"expected feature rows of length {len(FEATURE_NAMES)}")
    if not np.all(np.isfinite(X)):
        raise InvalidInput("features must be finite")
    return X


def encode_labels(labels):
    out = []
    for lab in labels:
        if lab == GOOD:
            out.append(1)
        elif lab == BAD:
            out.append(0)
        else:
            raise InvalidInput(f"label must be {GOOD} or {BAD}, got {lab!r}")
    return np.array(out, dtype=np.int64)


def _fit_standardizer(X):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


# --------------------------------------------------------------------------
# splitting

def split_train_test(labels, test_fraction=0.2, seed=0):
    """Stratified split of example indices into ``(train_idx, test_idx)``.

    Each class contributes ``round(n_class * test_fraction)`` examples to the
    test side, chosen by a seeded permutation.
    """
    y = encode_labels(labels)
    if y.size < 5:
        raise InvalidInput("need at least 5 examples to split")
    if len(set(y.tolist())) < 2:
        raise InvalidInput("both classes must be present")
    rng = np.random.default_rng(seed)
    test = []
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        n_test = int(np.floor(idx.size * test_fraction + 0.5))
        test.extend(idx[:n_test].tolist())
    test = np.array(sorted(test), dtype=np.int64)
    train = np.setdiff1d(np.arange(y.size), test)
    return train, test


def stratified_folds(y, n_folds, seed):
    """Assign every example a fold id; each class is dealt round-robin after
    a seeded shuffle."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    fold = np.empty(y.size, dtype=np.int64)
    offset = 0
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        if idx.size < n_folds:
            raise InvalidInput(
                f"class {GOOD if cls else BAD} has {idx.size} examples, fewer than "
                f"{n_folds} folds; some fold would hold a single class")
        idx = idx[rng.permutation(idx.size)]
        fold[idx] = (np.arange(idx.size) + offset) % n_folds
        offset += idx.size
    return fold


# --------------------------------------------------------------------------
# training

def _macro_f1(y, scores, threshold):
    pred = [GOOD if s >= threshold else BAD for s in scores]
    truth = [GOOD if v else BAD for v in y]
    return compute_metrics(truth, pred).macro_f1


def _build(kind, params):
    return _KINDS[kind](**params)


def train(X, labels, cfg: TrainConfig | None = None):
    """Fit a :class:`TriageModel` and return ``(model, cv_report)``."""
    cfg = cfg or TrainConfig()
    X = _as_matrix(X)
    y = encode_labels(labels)
    if len(set(y.tolist())) < 2:
        raise InvalidInput("training data must contain both GoodGait and BadGait")
    folds = stratified_folds(y, cfg.n_folds, cfg.seed)
    started = time.monotonic()
    deadline = started + cfg.time_budget_s

    results = []
    oof = {}
    for ci, (kind, items) in enumerate(cfg.candidates):
        if time.monotonic() >= deadline:
            break
        params = dict(items)
        scores = np.zeros(y.size)
        fold_f1 = []
        for f in range(cfg.n_folds):
            tr, te = folds != f, folds == f
            mean, std = _fit_standardizer(X[tr])
            m = _build(kind, params)
            m.fit((X[tr] - mean) / std, y[tr], np.random.default_rng([cfg.seed, f, ci]))
            scores[te] = m.predict_score((X[te] - mean) / std)
            fold_f1.append(_macro_f1(y[te], scores[te], cfg.threshold))
        if time.monotonic() > deadline:
            break
        oof[ci] = scores
        results.append({"index": ci, "name": _name(kind, params), "kind": kind,
                        "params": params, "fold_macro_f1": fold_f1,
                        "mean_macro_f1": float(np.mean(fold_f1))})
    if not results:
        raise BudgetError(f"time budget of {cfg.time_budget_s}s ran out before any candidate finished")

    ranked = sorted(results, key=lambda r: -r["mean_macro_f1"])  # stable: sweep order breaks ties
    chosen = ranked[: cfg.top_k] if cfg.ensemble else ranked[:1]
    total = sum(r["mean_macro_f1"] for r in chosen)
    if total > 0:
        weights = [r["mean_macro_f1"] / total for r in chosen]
    else:
        weights = [1.0 / len(chosen)] * len(chosen)

    ens_scores = sum(w * oof[r["index"]] for w, r in zip(weights, chosen))
    ens_fold_f1 = [_macro_f1(y[folds == f], ens_scores[folds == f], cfg.threshold)
                   for f in range(cfg.n_folds)]

    mean, std = _fit_standardizer(X)
    Z = (X - mean) / std
    components = []
    for w, r in zip(weights, chosen):
        m = _build(r["kind"], r["params"])
        m.fit(Z, y, np.random.default_rng([cfg.seed, cfg.n_folds, r["index"]]))
        components.append(Component(r["name"], m, float(w)))

    report = {
        "n_folds": cfg.n_folds,
        "seed": cfg.seed,
        "metric": "macro_f1",
        "ensemble": cfg.ensemble,
        "candidates": results,
        "completed": len(results),
        "swept": len(cfg.candidates),
        "selected": [r["name"] for r in chosen],
        "weights": weights,
        "selected_fold_macro_f1": ens_fold_f1,
        "selected_mean_macro_f1": float(np.mean(ens_fold_f1)),
    }
    metadata = {"seed": cfg.seed, "n_folds": cfg.n_folds, "n_train": int(y.size),
                "n_good": int(y.sum()), "n_bad": int(y.size - y.sum()),
                "feature_names": list(FEATURE_NAMES), "cv_report": report}
    return TriageModel(components, mean, std, cfg.threshold, metadata), report


# --------------------------------------------------------------------------
# inference

def predict(model: TriageModel, features):
    """Classify one feature vector; returns ``(label, good_score)``."""
    labels, scores = model.predict_labels([features])
    return labels[0], float(scores[0])


def predict_batch(model: TriageModel, X):
    return model.predict_labels(X)


def evaluate(model: TriageModel, X, labels) -> Metrics:
    X = _as_matrix(X)
    if X.shape[0] == 0:
        raise InvalidInput("test set is empty")
    pred, _ = model.predict_labels(X)
    return compute_metrics(list(labels), pred)


# --------------------------------------------------------------------------
# file format: a JSON document, keys sorted, floats in shortest repr form

def model_to_json(model: TriageModel) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "feature_names": list(FEATURE_NAMES),
        "classes": {"positive": GOOD, "negative": BAD},
        "standardize": {"mean": model.mean.tolist(), "std": model.std.tolist()},
        "threshold": model.threshold,
        "components": [
            {"name": c.name, "kind": c.model.kind, "params": c.model.params,
             "weight": c.weight, "state": c.model.to_state()}
            for c in model.components
        ],
        "metadata": model.metadata,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def model_from_json(text: str) -> TriageModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ParseError("not a gaittriage model document")
    if doc.get("version") != VERSION:
        raise ParseError(f"model version {doc.get('version')!r} unsupported (expected {VERSION})")
    try:
        comps = []
        for c in doc["components"]:
            cls = _KINDS[c["kind"]]
            comps.append(Component(c["name"], cls.from_state(c["params"], c["state"]),
                                   float(c["weight"])))
        mean = np.array(doc["standardize"]["mean"], dtype=np.float64)
        std = np.array(doc["standardize"]["std"], dtype=np.float64)
        if mean.shape != (len(FEATURE_NAMES),) or std.shape != mean.shape or not comps:
            raise ValueError("bad standardizer or empty component list")
        return TriageModel(comps, mean, std, float(doc["threshold"]), doc.get("metadata", {}))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"corrupt model document: {exc!r}") from exc


def save_model(model: TriageModel, path):
    from .._fileutil import atomic_write
    atomic_write(path, model_to_json(model))


def load_model(path) -> TriageModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(fh.read())
