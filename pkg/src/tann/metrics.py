"""Confusion-matrix based evaluation metrics.

Rows of the confusion matrix are true classes, columns are predictions.
Zero-denominator precision/recall/F1 are defined as 0, the convention used
by the mainstream evaluation toolkits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractError

METRICS_CSV_HEADER = "model,config,depth,final_loss,accuracy,weighted_f1"


@dataclass
class ConfusionMatrix:
    num_classes: int
    counts: np.ndarray  # (k, k) ints, rows = true, cols = predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class MetricsReport:
    accuracy: float
    weighted_f1: float
    per_class: list = field(default_factory=list)  # (precision, recall, f1) per class
    mean_loss: float = float("nan")
    confusion: ConfusionMatrix | None = None


def confusion(preds, labels, num_classes: int) -> ConfusionMatrix:
    preds = list(preds)
    labels = list(labels)
    if len(preds) != len(labels):
        raise ContractError(f"{len(preds)} predictions vs {len(labels)} labels")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    for t, p in zip(labels, preds):
        if not (0 <= t < num_classes and 0 <= p < num_classes):
            raise ContractError(f"class pair ({t}, {p}) out of range for k={num_classes}")
        counts[t, p] += 1
    return ConfusionMatrix(num_classes=num_classes, counts=counts)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ContractError("accuracy of an empty confusion matrix is undefined")
    return float(np.trace(cm.counts)) / cm.total


def per_class_prf(cm: ConfusionMatrix) -> list[tuple[float, float, float]]:
    out = []
    for c in range(cm.num_classes):
        tp = float(cm.counts[c, c])
        col = float(cm.counts[:, c].sum())
        row = float(cm.counts[c, :].sum())
        precision = tp / col if col > 0 else 0.0
        recall = tp / row if row > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        out.append((precision, recall, f1))
    return out


def f1_score(cm: ConfusionMatrix, average: str = "weighted") -> float:
    """Support-weighted (default) or macro-averaged F1."""
    if cm.total == 0:
        raise ContractError("F1 of an empty confusion matrix is undefined")
    prf = per_class_prf(cm)
    f1s = np.array([f for _, _, f in prf])
    if average == "macro":
        return float(f1s.mean())
    if average == "weighted":
        support = cm.counts.sum(axis=1).astype(np.float64)
        return float((f1s * support).sum() / cm.total)
    raise ContractError(f"unknown average {average!r}")


def weighted_f1(cm: ConfusionMatrix) -> float:
    return f1_score(cm, average="weighted")


def report(cm: ConfusionMatrix, mean_loss: float = float("nan")) -> MetricsReport:
    return MetricsReport(
        accuracy=accuracy(cm),
        weighted_f1=weighted_f1(cm),
        per_class=per_class_prf(cm),
        mean_loss=mean_loss,
        confusion=cm,
    )


def metrics_csv_row(model: str, config: str, depth: int, final_loss: float,
                    acc: float, wf1: float) -> str:
    return f"{model},{config},{depth},{final_loss!r},{acc!r},{wf1!r}"
