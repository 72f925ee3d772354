"""Model construction and the fit/predict step shared by every protocol."""

from __future__ import annotations

import numpy as np
from sklearn.ensemble import GradientBoostingClassifier

from .data import feature_matrix
from .metrics import evaluate


def make_model(seed: int) -> GradientBoostingClassifier:
    """Gradient-boosted trees, library defaults, seeded for reproducibility.

    The exact (non-histogram) variant: its defaults can still split on the
    small per-iteration training sets this package works with, where a
    histogram learner's 20-sample leaf floor would collapse to a constant
    predictor.
    """
    return GradientBoostingClassifier(random_state=seed)


def fit(train_frame, seed: int):
    """Fit on a frame; returns the model (or a constant stub if one-class)."""
    X, y = feature_matrix(train_frame)
    if len(np.unique(y)) < 2:
        return _Constant(int(y[0]) if len(y) else 0)
    model = make_model(seed)
    model.fit(X, y)
    return model


def score(model, eval_frame) -> dict[str, float]:
    X, y = feature_matrix(eval_frame)
    return evaluate(y, model.predict(X))


class _Constant:
    """Degenerate single-class training data yields a constant predictor."""

    def __init__(self, value: int):
        self.value = value

    def predict(self, X):
        return np.full(len(X), self.value, dtype=int)
