"""Competition metrics for three-way polarity classification.

* accuracy: fraction of correct predictions
* avg_recall: recall averaged over positive, negative and neutral
* f1_pn: F1 averaged over positive and negative only (the ranking metric)
* macro_f1: F1 averaged over all three classes (supplementary)

Empty rows or columns give zero recall or precision rather than an error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import CLASSES, SentimentLabel
from .exceptions import EmptyInput, EmptyMatrix, LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are gold classes, columns predictions, both in canonical order."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (len(CLASSES), len(CLASSES)) or np.any(counts < 0):
            raise ValueError("confusion counts must be a non-negative 3x3 matrix")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __getitem__(self, key):
        gold, pred = key
        return int(self.counts[SentimentLabel.parse(gold).index, SentimentLabel.parse(pred).index])


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    avg_recall: float
    f1_pn: float
    macro_f1: float
    precision: dict = field(default_factory=dict)
    recall: dict = field(default_factory=dict)
    f1: dict = field(default_factory=dict)
    confusion: ConfusionMatrix | None = None

    def to_dict(self) -> dict:
        out = {
            "accuracy": self.accuracy,
            "avg_recall": self.avg_recall,
            "f1_pn": self.f1_pn,
            "macro_f1": self.macro_f1,
        }
        for c in CLASSES:
            out[f"precision_{c.value}"] = self.precision[c]
            out[f"recall_{c.value}"] = self.recall[c]
            out[f"f1_{c.value}"] = self.f1[c]
        for g in CLASSES:
            for p in CLASSES:
                out[f"confusion_{g.value}_{p.value}"] = int(self.confusion.counts[g.index, p.index])
        return out

    def format_text(self) -> str:
        lines = [
            f"accuracy    {self.accuracy:.4f}",
            f"avg_recall  {self.avg_recall:.4f}",
            f"f1_pn       {self.f1_pn:.4f}",
            f"macro_f1    {self.macro_f1:.4f}",
            "",
            f"{'class':<10}{'precision':>10}{'recall':>10}{'f1':>10}",
        ]
        for c in CLASSES:
            lines.append(f"{c.value:<10}{self.precision[c]:>10.4f}{self.recall[c]:>10.4f}{self.f1[c]:>10.4f}")
        lines += ["", "confusion (rows gold, columns predicted)",
                  " " * 10 + "".join(f"{c.value:>10}" for c in CLASSES)]
        for g in CLASSES:
            row = "".join(f"{int(self.confusion.counts[g.index, p.index]):>10d}" for p in CLASSES)
            lines.append(f"{g.value:<10}{row}")
        return "\n".join(lines)


def confusion(gold: Sequence, predicted: Sequence) -> ConfusionMatrix:
    gold, predicted = list(gold), list(predicted)
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold labels but {len(predicted)} predictions")
    if not gold:
        raise EmptyInput("no labels to evaluate")
    counts = np.zeros((len(CLASSES), len(CLASSES)), dtype=np.int64)
    for g, p in zip(gold, predicted):
        counts[SentimentLabel.parse(g).index, SentimentLabel.parse(p).index] += 1
    return ConfusionMatrix(counts)


def _ratio(num, den) -> float:
    return float(num) / float(den) if den else 0.0


def report(cm: ConfusionMatrix) -> EvalReport:
    counts = cm.counts
    total = counts.sum()
    if total == 0:
        raise EmptyMatrix("confusion matrix is empty")
    diag = np.diag(counts)
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    precision, recall, f1 = {}, {}, {}
    for c in CLASSES:
        i = c.index
        precision[c] = _ratio(diag[i], cols[i])
        recall[c] = _ratio(diag[i], rows[i])
        f1[c] = _ratio(2 * precision[c] * recall[c], precision[c] + recall[c])
    pos, neg = SentimentLabel.POSITIVE, SentimentLabel.NEGATIVE
    return EvalReport(
        accuracy=_ratio(diag.sum(), total),
        avg_recall=sum(recall.values()) / len(CLASSES),
        f1_pn=(f1[pos] + f1[neg]) / 2.0,
        macro_f1=sum(f1.values()) / len(CLASSES),
        precision=precision,
        recall=recall,
        f1=f1,
        confusion=cm,
    )


def evaluate(model, dataset) -> EvalReport:
    """Score a fitted ensemble on a labeled dataset."""
    dataset = list(dataset)
    if not dataset:
        raise EmptyInput("cannot evaluate on an empty dataset")
    predicted = model.predict([rec.doc for rec in dataset])
    return report(confusion([rec.label for rec in dataset], predicted))
