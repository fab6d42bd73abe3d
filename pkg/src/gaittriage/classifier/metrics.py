"""Binary confusion-matrix metrics, reported per class and averaged."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput
from ..manifest import BAD, GOOD

CLASSES = (BAD, GOOD)


def _div(a, b):
    return a / b if b else 0.0


@dataclass(frozen=True)
class Metrics:
    """Rows of ``confusion`` are the true class, columns the predicted one,
    both in ``classes`` order."""

    confusion: np.ndarray
    classes: tuple = CLASSES

    def __post_init__(self):
        cm = np.asarray(self.confusion, dtype=np.int64)
        k = len(self.classes)
        if cm.shape != (k, k) or (cm < 0).any():
            raise InvalidInput("confusion matrix must be a non-negative square matrix")
        object.__setattr__(self, "confusion", cm)
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    def support(self, c) -> int:
        i = self.classes.index(c)
        return int(self.confusion[i].sum())

    def precision(self, c) -> float:
        i = self.classes.index(c)
        return _div(float(self.confusion[i, i]), float(self.confusion[:, i].sum()))

    def recall(self, c) -> float:
        i = self.classes.index(c)
        return _div(float(self.confusion[i, i]), float(self.confusion[i].sum()))

    def f1(self, c) -> float:
        p, r = self.precision(c), self.recall(c)
        return _div(2.0 * p * r, p + r)

    def _macro(self, fn):
        return float(np.mean([fn(c) for c in self.classes]))

    def _weighted(self, fn):
        w = np.array([self.support(c) for c in self.classes], dtype=np.float64)
        if w.sum() == 0:
            return 0.0
        return float(np.dot(w, [fn(c) for c in self.classes]) / w.sum())

    @property
    def macro_precision(self):
        return self._macro(self.precision)

    @property
    def macro_recall(self):
        return self._macro(self.recall)

    @property
    def macro_f1(self):
        return self._macro(self.f1)

    @property
    def accuracy(self):
        return _div(float(np.trace(self.confusion)), float(self.total))

    def to_dict(self) -> dict:
        per_class = {
            c: {"precision": self.precision(c), "recall": self.recall(c),
                "f1": self.f1(c), "support": self.support(c)}
            for c in self.classes
        }
        return {
            "classes": list(self.classes),
            "confusion": self.confusion.tolist(),
            "per_class": per_class,
            "macro": {"precision": self.macro_precision, "recall": self.macro_recall,
                      "f1": self.macro_f1},
            "weighted": {"precision": self._weighted(self.precision),
                         "recall": self._weighted(self.recall),
                         "f1": self._weighted(self.f1)},
            "accuracy": self.accuracy,
            "total": self.total,
        }

    def table_rows(self):
        """CSV-ready rows: class, precision, recall, f1, support."""
        rows = [(c, self.precision(c), self.recall(c), self.f1(c), self.support(c))
                for c in self.classes]
        rows.append(("macro", self.macro_precision, self.macro_recall, self.macro_f1, self.total))
        rows.append(("weighted", self._weighted(self.precision), self._weighted(self.recall),
                     self._weighted(self.f1), self.total))
        return rows

    def confusion_text(self) -> str:
        width = max(len(c) for c in self.classes) + 2
        cell = max(6, len(str(self.confusion.max())) + 2)
        head = " " * width + "".join(f"{c:>{max(cell, len(c) + 2)}}" for c in self.classes)
        lines = ["truth \\ predicted", head]
        for c, row in zip(self.classes, self.confusion):
            lines.append(f"{c:<{width}}" + "".join(
                f"{v:>{max(cell, len(k) + 2)}}" for v, k in zip(row, self.classes)))
        return "\n".join(lines) + "\n"


def confusion_matrix(truth, predicted, classes=CLASSES) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truth, predicted):
        try:
            cm[index[t], index[p]] += 1
        except KeyError as exc:
            raise InvalidInput(f"unknown class label {exc.args[0]!r}") from exc
    return cm


def compute_metrics(truth, predicted, classes=CLASSES) -> Metrics:
    truth, predicted = list(truth), list(predicted)
    if len(truth) != len(predicted):
        raise InvalidInput("truth and predictions differ in length")
    return Metrics(confusion_matrix(truth, predicted, classes), classes)
