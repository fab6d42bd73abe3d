"""CART trees on weighted samples and a bagged ensemble of them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _backend


@dataclass
class Tree:
    """Flat node arrays in pre-order; ``feature == -1`` marks a leaf.

    ``value`` holds the weighted share of the positive class in each node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict_score(self, X):
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            inner = self.feature[node] >= 0
            if not inner.any():
                return self.value[node]
            f = np.where(inner, self.feature[node], 0)
            go_left = X[rows, f] <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(inner, nxt, node)

    def to_state(self):
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "value": self.value.tolist()}

    @classmethod
    def from_state(cls, s):
        return cls(np.array(s["feature"], dtype=np.int64),
                   np.array(s["threshold"], dtype=np.float64),
                   np.array(s["left"], dtype=np.int64),
                   np.array(s["right"], dtype=np.int64),
                   np.array(s["value"], dtype=np.float64))


def fit_tree(X, y, w=None, max_depth=4):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    w = np.ones(len(y)) if w is None else np.asarray(w, dtype=np.float64)
    feature, threshold, left, right, value = [], [], [], [], []

    def grow(rows, depth):
        node = len(feature)
        ws = w[rows]
        total = ws.sum()
        pos = ws[y[rows] == 1].sum()
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(pos / total if total > 0 else 0.0)
        if depth >= max_depth or pos == 0 or pos == total or rows.size < 2:
            return node
        f, thr, gain = _backend.best_split(X[rows], y[rows], ws)
        if f < 0:
            return node
        mask = X[rows, f] <= thr
        feature[node] = int(f)
        threshold[node] = float(thr)
        left[node] = grow(rows[mask], depth + 1)
        right[node] = grow(rows[~mask], depth + 1)
        return node

    grow(np.flatnonzero(w > 0), 0)
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(value))


class BaggedTrees:
    """Bootstrap-aggregated CART trees; score is the mean leaf share."""

    kind = "bagged_trees"

    def __init__(self, n_trees=10, max_depth=4):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.trees: list[Tree] = []

    @property
    def params(self):
        return {"n_trees": self.n_trees, "max_depth": self.max_depth}

    def fit(self, X, y, rng):
        n = len(y)
        self.trees = []
        for _ in range(self.n_trees):
            counts = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
            self.trees.append(fit_tree(X, y, counts, self.max_depth))
        return self

    def predict_score(self, X):
        return np.mean([t.predict_score(X) for t in self.trees], axis=0)

    def to_state(self):
        return {"trees": [t.to_state() for t in self.trees]}

    @classmethod
    def from_state(cls, params, state):
        m = cls(**params)
        m.trees = [Tree.from_state(t) for t in state["trees"]]
        return m
