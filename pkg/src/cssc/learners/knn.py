from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distribution import ClassDistribution, ProbabilisticClassifier, as_matrix
from .kdtree import KdTree


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


def weighted_vote(labels: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Fraud share of the summed neighbour weights, row by row.

    A neighbourhood whose weights sum to zero carries no information and
    yields 0.5 (which the argmax tie rule maps to fraud).
    """
    w_fraud = np.where(labels == 1, weights, 0.0).sum(axis=-1)
    w_total = weights.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(w_total > 0, w_fraud / np.where(w_total > 0, w_total, 1.0), 0.5)
    return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class KnnModel(ProbabilisticClassifier):
    tree: KdTree
    labels: np.ndarray
    weights: np.ndarray
    k: int

    @property
    def points(self) -> np.ndarray:
        return self.tree.points

    def neighbours(self, X) -> np.ndarray:
        _, idx = self.tree.query_many(as_matrix(X), self.k)
        return idx

    def predict_proba(self, X) -> np.ndarray:
        idx = self.neighbours(X)
        return weighted_vote(self.labels[idx], self.weights[idx])


def knn_train(X, y, weights=None, cfg: KnnConfig = KnnConfig()) -> KnnModel:
    X = as_matrix(X)
    if X.shape[0] == 0:
        raise ValueError("k-NN needs at least one reference point")
    y = np.asarray(y, dtype=np.int8)
    w = np.ones(X.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("reference weights must be non-negative")
    return KnnModel(KdTree(X), y, w, cfg.k)


def knn_predict(X, y, weights, cfg: KnnConfig, x, model: Optional[KnnModel] = None) -> ClassDistribution:
    """Weighted k-NN vote for a single query over the given reference points."""
    if model is None:
        model = knn_train(X, y, weights, cfg)
    return model.distribution(x)
