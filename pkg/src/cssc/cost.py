"""Misclassification costs, minimum-risk decisions and MetaCost relabeling.

MetaCost makes an arbitrary (semi-supervised) learner cost-sensitive without
touching class proportions: bag the learner to estimate P(fraud | x) for each
labeled instance, relabel every instance with its minimum-risk class, and
train the learner once more on the relabeled data.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Protocol

import numpy as np

from .dataset import Label
from .learners import ProbabilisticClassifier
from .learners.distribution import as_matrix, hard_labels
from .seeding import Seed, child_seed, make_rng

# seed namespaces
_BAG = 1
_FINAL = 2


@dataclass(frozen=True)
class CostMatrix:
    """2x2 penalties indexed by (predicted, actual); fraud is the positive class."""

    c_fn: float = 2.0
    c_fp: float = 1.0
    c_tp: float = 0.0
    c_tn: float = 0.0

    def __post_init__(self):
        if self.c_fp < 0 or self.c_fn < 0:
            raise ValueError("misclassification costs must be non-negative")

    def cost(self, predicted: int, actual: int) -> float:
        if predicted == Label.FRAUD:
            return self.c_tp if actual == Label.FRAUD else self.c_fp
        return self.c_fn if actual == Label.FRAUD else self.c_tn

    def with_fn(self, c_fn: float) -> "CostMatrix":
        return replace(self, c_fn=float(c_fn))

    def scaled(self, alpha: float) -> "CostMatrix":
        return CostMatrix(self.c_fn * alpha, self.c_fp * alpha, self.c_tp * alpha, self.c_tn * alpha)

    def to_dict(self) -> dict:
        return {"c_fn": self.c_fn, "c_fp": self.c_fp, "c_tp": self.c_tp, "c_tn": self.c_tn}


def conditional_risk(d, candidate: int, cm: CostMatrix) -> float:
    """Expected cost of predicting ``candidate`` under distribution ``d``."""
    if candidate == Label.FRAUD:
        return d.p_normal * cm.c_fp + d.p_fraud * cm.c_tp
    return d.p_normal * cm.c_tn + d.p_fraud * cm.c_fn


def min_risk_class(d, cm: CostMatrix) -> Label:
    """Class with the lower conditional risk; an exact tie goes to fraud."""
    if conditional_risk(d, Label.FRAUD, cm) <= conditional_risk(d, Label.NORMAL, cm):
        return Label.FRAUD
    return Label.NORMAL


def min_risk_labels(p_fraud, cm: CostMatrix) -> np.ndarray:
    """Vectorized :func:`min_risk_class` over fraud probabilities."""
    p = np.asarray(p_fraud, dtype=np.float64)
    q = 1.0 - p
    risk_fraud = q * cm.c_fp + p * cm.c_tp
    risk_normal = q * cm.c_tn + p * cm.c_fn
    return (risk_fraud <= risk_normal).astype(np.int8)


def total_cost(conf, cm: CostMatrix) -> float:
    """FN count times FN cost plus FP count times FP cost."""
    return conf.fn * cm.c_fn + conf.fp * cm.c_fp


@dataclass(frozen=True)
class MetaCostConfig:
    """Bagging settings.

    ``bag_size`` of ``None`` means the training-set size. ``batch_size`` only
    sets how many rows are scored per prediction call.
    """

    n_bags: int = 10
    bag_size: Optional[int] = None
    use_all_models: bool = True
    bootstrap: bool = True
    batch_size: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n_bags < 1:
            raise ValueError(f"n_bags must be >= 1, got {self.n_bags}")
        if self.bag_size is not None and self.bag_size < 1:
            raise ValueError(f"bag_size must be >= 1, got {self.bag_size}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class SscFitter(Protocol):
    def fit_ssc(self, X_labeled, y_labeled, X_unlabeled, seed: Seed) -> ProbabilisticClassifier: ...


def _predict_batched(model, X, batch_size: int) -> np.ndarray:
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], batch_size):
        out[start : start + batch_size] = model.predict_proba(X[start : start + batch_size])
    return out


def _pool(X_unlabeled, n_features: int) -> np.ndarray:
    if X_unlabeled is None:
        return np.empty((0, n_features))
    return np.asarray(X_unlabeled, dtype=np.float64).reshape(-1, n_features)


def bagged_fraud_probabilities(
    X_labeled,
    y_labeled,
    X_unlabeled,
    pipeline: SscFitter,
    cfg: MetaCostConfig = MetaCostConfig(),
    seed: Seed = 0,
) -> np.ndarray:
    """P(fraud | x) for every labeled row, averaged over the bag models.

    Each bag draws ``bag_size`` labeled rows with replacement (or takes them
    all, in order, with ``bootstrap=False``) and always receives the whole
    unlabeled pool. With ``use_all_models=False`` a row's estimate only uses
    bags that left it out, falling back to every bag when none did.
    """
    X_l = as_matrix(X_labeled)
    y_l = np.asarray(y_labeled)
    n = X_l.shape[0]
    if n == 0:
        raise ValueError("MetaCost needs a non-empty labeled set")
    X_unlabeled = _pool(X_unlabeled, X_l.shape[1])
    size = cfg.bag_size or n
    base = child_seed(seed, cfg.seed)
    probs = np.empty((cfg.n_bags, n))
    in_bag = np.zeros((cfg.n_bags, n), dtype=bool)
    for b in range(cfg.n_bags):
        bag_seed = child_seed(base, _BAG, b)
        if cfg.bootstrap:
            idx = make_rng(child_seed(bag_seed, 0)).integers(0, n, size=size)
        else:
            idx = np.arange(min(size, n))
        in_bag[b, idx] = True
        model = pipeline.fit_ssc(X_l[idx], y_l[idx], X_unlabeled, child_seed(bag_seed, 1))
        probs[b] = _predict_batched(model, X_l, cfg.batch_size)
    if cfg.use_all_models:
        return probs.mean(axis=0)
    out_of_bag = ~in_bag
    counts = out_of_bag.sum(axis=0)
    oob_mean = np.where(out_of_bag, probs, 0.0).sum(axis=0) / np.maximum(counts, 1)
    return np.where(counts > 0, oob_mean, probs.mean(axis=0))


def metacost_relabel(
    X_labeled,
    y_labeled,
    X_unlabeled,
    pipeline: SscFitter,
    cm: CostMatrix,
    cfg: MetaCostConfig = MetaCostConfig(),
    seed: Seed = 0,
    bagged: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Minimum-risk labels for the labeled rows; features are never touched.

    ``bagged`` short-circuits the bagging step with precomputed estimates
    (they do not depend on the cost matrix, so a penalty sweep reuses them).
    """
    if bagged is None:
        bagged = bagged_fraud_probabilities(X_labeled, y_labeled, X_unlabeled, pipeline, cfg, seed)
    return min_risk_labels(bagged, cm)


@dataclass(frozen=True, eq=False)
class CostSensitiveModel(ProbabilisticClassifier):
    """Final SSC model trained on MetaCost-relabeled data.

    Hard predictions are the argmax of the final model's distribution; costs
    act through the relabeling. ``min_risk_predict`` additionally applies the
    minimum-risk rule at prediction time.
    """

    final: ProbabilisticClassifier
    relabeled: np.ndarray
    bagged: np.ndarray
    cost: CostMatrix
    min_risk_predict: bool = False

    def predict_proba(self, X) -> np.ndarray:
        return self.final.predict_proba(X)

    def predict(self, X) -> np.ndarray:
        p = self.predict_proba(X)
        return min_risk_labels(p, self.cost) if self.min_risk_predict else hard_labels(p)


def metacost_train(
    X_labeled,
    y_labeled,
    X_unlabeled,
    pipeline: SscFitter,
    cm: CostMatrix,
    cfg: MetaCostConfig = MetaCostConfig(),
    seed: Seed = 0,
    bagged: Optional[np.ndarray] = None,
    min_risk_predict: bool = False,
    cache: Optional[dict] = None,
) -> CostSensitiveModel:
    """Bag, relabel to minimum risk, retrain.

    ``cache`` maps relabelings to final models; for a fixed seed the final fit
    depends only on the labels, so callers pricing several cost matrices on
    the same data can share it.
    """
    X_labeled = as_matrix(X_labeled)
    X_unlabeled = _pool(X_unlabeled, X_labeled.shape[1])
    if bagged is None:
        bagged = bagged_fraud_probabilities(X_labeled, y_labeled, X_unlabeled, pipeline, cfg, seed)
    relabeled = min_risk_labels(bagged, cm)
    key = relabeled.tobytes()
    if cache is not None and key in cache:
        final = cache[key]
    else:
        final = pipeline.fit_ssc(X_labeled, relabeled, X_unlabeled, child_seed(seed, cfg.seed, _FINAL))
        if cache is not None:
            cache[key] = final
    return CostSensitiveModel(final, relabeled, np.asarray(bagged), cm, min_risk_predict)
