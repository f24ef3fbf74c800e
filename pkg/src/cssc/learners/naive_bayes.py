"""Gaussian naive Bayes with log-domain posteriors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distribution import ClassDistribution, ProbabilisticClassifier, as_matrix

VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class NbConfig:
    var_floor: float = VARIANCE_FLOOR


@dataclass(frozen=True, eq=False)
class NbModel(ProbabilisticClassifier):
    """Per-class priors, feature means and variances (row 0 normal, row 1 fraud).

    ``only_class`` is set when training saw a single class; such a model
    predicts that class with probability 1.
    """

    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    only_class: Optional[int] = None

    def log_joint(self, X) -> np.ndarray:
        X = as_matrix(X)
        diff = X[:, None, :] - self.means[None, :, :]
        ll = -0.5 * (np.log(2.0 * np.pi * self.variances)[None] + diff**2 / self.variances[None])
        return ll.sum(axis=2) + np.log(self.priors)[None, :]

    def predict_proba(self, X) -> np.ndarray:
        X = as_matrix(X)
        if self.only_class is not None:
            return np.full(X.shape[0], float(self.only_class))
        lj = self.log_joint(X)
        return np.exp(lj[:, 1] - np.logaddexp(lj[:, 0], lj[:, 1]))


def nb_train(X, y, cfg: NbConfig = NbConfig()) -> NbModel:
    X = as_matrix(X)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("cannot train naive Bayes on an empty training set")
    d = X.shape[1]
    counts = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=np.float64)
    means = np.zeros((2, d))
    variances = np.full((2, d), cfg.var_floor)
    for c in (0, 1):
        rows = X[y == c]
        if len(rows):
            means[c] = rows.mean(axis=0)
            variances[c] = np.maximum(rows.var(axis=0), cfg.var_floor)
    present = np.flatnonzero(counts)
    if len(present) == 1:
        priors = (counts == counts.max()).astype(np.float64)
        return NbModel(priors, means, variances, only_class=int(present[0]))
    priors = (counts + 1.0) / (counts.sum() + 2.0)
    return NbModel(priors, means, variances)


def nb_predict(model: NbModel, x) -> ClassDistribution:
    return model.distribution(x)
