"""Held-out evaluation: confusion matrix, per-class precision/recall/F1."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataset
from . import model as modeling
from .architecture import CLASS_LABELS
from .dataset import LabeledDataset, image_to_input


@dataclass(frozen=True)
class EvaluationReport:
    labels: tuple
    matrix: tuple          # rows = true class, columns = predicted class
    precision: dict
    recall: dict
    f1: dict
    accuracy: float
    support: dict

    def to_csv(self) -> str:
        lines = ["class,support,precision,recall,f1"]
        for label in self.labels:
            lines.append(f"{label},{self.support[label]},{self.precision[label]:.6f},"
                         f"{self.recall[label]:.6f},{self.f1[label]:.6f}")
        lines.append(f"accuracy,,{self.accuracy:.6f},,")
        return "\n".join(lines) + "\n"


def report_from_matrix(matrix) -> EvaluationReport:
    """Metrics from a confusion matrix with rows=true, columns=predicted.

    Undefined ratios (a class never predicted, or absent from the data)
    score 0 rather than raising.
    """
    m = np.asarray(matrix, dtype=np.int64)
    k = len(CLASS_LABELS)
    if m.shape != (k, k):
        raise DegenerateDataset(f"confusion matrix must be {k}x{k}, got {m.shape}")
    precision, recall, f1, support = {}, {}, {}, {}
    for i, label in enumerate(CLASS_LABELS):
        tp = int(m[i, i])
        pred = int(m[:, i].sum())
        true = int(m[i, :].sum())
        p = tp / pred if pred else 0.0
        r = tp / true if true else 0.0
        precision[label] = p
        recall[label] = r
        f1[label] = 2 * p * r / (p + r) if (p + r) else 0.0
        support[label] = true
    total = int(m.sum())
    if total == 0:
        raise DegenerateDataset("confusion matrix is empty")
    accuracy = float(np.trace(m)) / total
    return EvaluationReport(labels=CLASS_LABELS,
                            matrix=tuple(tuple(int(v) for v in row) for row in m),
                            precision=precision, recall=recall, f1=f1,
                            accuracy=accuracy, support=support)


def evaluate(model: modeling.Model, dataset: LabeledDataset) -> EvaluationReport:
    if len(dataset) == 0:
        raise DegenerateDataset("evaluation set is empty")
    k = len(CLASS_LABELS)
    matrix = np.zeros((k, k), dtype=np.int64)
    for img, label in dataset.items:
        x = image_to_input(img, model.spec.input_shape)
        probs = modeling.forward(model, x, train=False)
        matrix[CLASS_LABELS.index(label), int(np.argmax(probs))] += 1
    return report_from_matrix(matrix)
