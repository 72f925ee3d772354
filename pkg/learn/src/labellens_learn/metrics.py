"""Per-class evaluation metrics for dominance prediction.

The interesting error structure is asymmetric -- mistaking a kept label for a
dominated one is not the same mistake as the reverse -- so accuracy is
reported per class: ``accP`` on the kept labels (target 0), ``accD`` on the
dominated ones (target 1), their balanced mean, and their absolute gap.
Precision, recall, and F1 treat ``dominated`` as the positive class, which
makes ``recall`` identical to ``accD`` by construction.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.metrics import precision_score

METRIC_NAMES = ("accP", "accD", "balanced_accuracy", "diff", "precision", "recall", "f1")


def class_accuracy(y_true: np.ndarray, y_pred: np.ndarray, klass: int) -> float:
    mask = y_true == klass
    if not mask.any():
        return float("nan")
    return float((y_pred[mask] == klass).mean())


def evaluate(y_true, y_pred) -> dict[str, float]:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("prediction and truth shapes differ")
    acc_p = class_accuracy(y_true, y_pred, 0)
    acc_d = class_accuracy(y_true, y_pred, 1)
    precision = float(precision_score(y_true, y_pred, zero_division=0))
    # F1 by its definition from precision and recall; computing it from raw
    # confusion counts instead can drift by one ulp.
    recall_or_zero = 0.0 if math.isnan(acc_d) else acc_d
    f1 = (
        2 * precision * recall_or_zero / (precision + recall_or_zero)
        if precision + recall_or_zero > 0
        else 0.0
    )
    return {
        "accP": acc_p,
        "accD": acc_d,
        "balanced_accuracy": float(np.nanmean([acc_p, acc_d])),
        "diff": abs(acc_p - acc_d),
        "precision": precision,
        "recall": acc_d,
        "f1": f1,
    }


def aggregate(results: list[dict[str, float]]) -> dict[str, float]:
    """Mean of each metric across evaluation units (NaN-safe)."""
    if not results:
        raise ValueError("nothing to aggregate")
    return {
        name: float(np.nanmean([r[name] for r in results])) for name in METRIC_NAMES
    }
