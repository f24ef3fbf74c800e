"""Yatsi and Chopper: two ways to put an unlabeled pool to work.

Yatsi pre-labels the pool with a first learner, gives each pre-labeled point a
fractional weight and classifies by a weighted k-NN vote over labeled and
pre-labeled points together.

Chopper self-labels the pool chunk by chunk: the current classifier scores
what is left, the most confident chunk (largest margin between the two class
probabilities) joins the training set with hard pseudo-labels, and a second
learner takes over from the second round on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .learners import (
    ClassDistribution,
    KdTree,
    LearnerConfigs,
    ProbabilisticClassifier,
    check_learner,
    hard_labels,
    train_learner,
    weighted_vote,
)
from .learners.distribution import as_matrix
from .seeding import Seed, child_seed, make_rng


@dataclass(frozen=True)
class YatsiConfig:
    first_learner: str = "nb"
    k: int = 5
    weight_factor: float = 1.0

    def __post_init__(self):
        check_learner(self.first_learner)
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.weight_factor < 0:
            raise ValueError(f"weight_factor must be >= 0, got {self.weight_factor}")


@dataclass(frozen=True)
class ChopperConfig:
    first_learner: str = "nb"
    second_learner: str = "rf"
    chunk_fraction: float = 0.10
    max_iterations: Optional[int] = None

    def __post_init__(self):
        check_learner(self.first_learner)
        check_learner(self.second_learner)
        if not 0.0 < self.chunk_fraction <= 1.0:
            raise ValueError(f"chunk_fraction must lie in (0, 1], got {self.chunk_fraction}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1 or None")


def unlabeled_weight(n_labeled: int, n_unlabeled: int, weight_factor: float) -> float:
    """Weight of one pre-labeled point: the pool's total vote is ``weight_factor`` times the labeled total."""
    if n_unlabeled == 0:
        return 0.0
    return weight_factor * n_labeled / n_unlabeled


@dataclass(frozen=True, eq=False)
class YatsiModel(ProbabilisticClassifier):
    """Merged reference set: labeled rows first (weight 1), then pre-labeled rows.

    Pre-labeled rows are dropped at weight 0, so a zero weighting factor
    reduces exactly to k-NN over the labeled data.
    """

    points: np.ndarray
    labels: np.ndarray
    weights: np.ndarray
    is_prelabeled: np.ndarray
    k: int
    unlabeled_weight: float
    tree: KdTree = field(repr=False)

    @property
    def n_labeled(self) -> int:
        return int(np.sum(~self.is_prelabeled))

    def predict_proba(self, X) -> np.ndarray:
        _, idx = self.tree.query_many(as_matrix(X), self.k)
        return weighted_vote(self.labels[idx], self.weights[idx])


def yatsi_train(
    X_labeled,
    y_labeled,
    X_unlabeled,
    cfg: YatsiConfig = YatsiConfig(),
    learners: LearnerConfigs = LearnerConfigs(),
    seed: Seed = 0,
) -> YatsiModel:
    X_l = as_matrix(X_labeled)
    y_l = np.asarray(y_labeled, dtype=np.int8)
    X_u = np.asarray(X_unlabeled, dtype=np.float64).reshape(-1, X_l.shape[1])
    if X_l.shape[0] == 0:
        raise ValueError("Yatsi needs a non-empty labeled set")
    w_u = unlabeled_weight(X_l.shape[0], X_u.shape[0], cfg.weight_factor)
    points, labels, weights = [X_l], [y_l], [np.ones(X_l.shape[0])]
    prelabeled = [np.zeros(X_l.shape[0], dtype=bool)]
    if X_u.shape[0] and w_u > 0:
        first = train_learner(cfg.first_learner, X_l, y_l, learners, make_rng(child_seed(seed, 0)))
        points.append(X_u)
        labels.append(first.predict(X_u))
        weights.append(np.full(X_u.shape[0], w_u))
        prelabeled.append(np.ones(X_u.shape[0], dtype=bool))
    P = np.vstack(points)
    return YatsiModel(
        points=P,
        labels=np.concatenate(labels).astype(np.int8),
        weights=np.concatenate(weights),
        is_prelabeled=np.concatenate(prelabeled),
        k=cfg.k,
        unlabeled_weight=w_u,
        tree=KdTree(P),
    )


def yatsi_predict(model: YatsiModel, x) -> ClassDistribution:
    return model.distribution(x)


def margin(d) -> float:
    """Confidence margin |p_normal - p_fraud| of a distribution."""
    return abs(d.p_normal - d.p_fraud)


def margins(p_fraud: np.ndarray) -> np.ndarray:
    p = np.asarray(p_fraud, dtype=np.float64)
    return np.abs((1.0 - p) - p)


@dataclass(frozen=True, eq=False)
class ChopperModel(ProbabilisticClassifier):
    """Final second-learner model plus the record of how the pool was chopped.

    ``chop_order`` lists pool indices in the order they were moved into
    training; ``chop_round[i]`` is the (1-based) round in which pool instance
    ``i`` left the pool and ``pool_fraud[i]`` the fraud probability it was
    given then.
    """

    final: ProbabilisticClassifier
    chop_order: np.ndarray
    chop_round: np.ndarray
    pool_fraud: np.ndarray
    pseudo_labels: np.ndarray
    n_rounds: int

    def predict_proba(self, X) -> np.ndarray:
        return self.final.predict_proba(X)


def chunk_size(fraction: float, pool_size: int) -> int:
    return max(1, math.ceil(fraction * pool_size - 1e-9))


def chopper_train(
    X_labeled,
    y_labeled,
    X_pool,
    cfg: ChopperConfig = ChopperConfig(),
    learners: LearnerConfigs = LearnerConfigs(),
    seed: Seed = 0,
) -> tuple[ChopperModel, np.ndarray]:
    """Iterative margin-ranked self-labeling.

    Round 1 trains the first learner on the labeled data; every later round
    retrains the second learner on the augmented set. Each round scores the
    remaining pool, sorts it by margin (descending, ties by pool position) and
    moves the top ``ceil(chunk_fraction * |pool|)`` rows into training with
    their argmax labels. When ``max_iterations`` is reached the last round
    takes the whole remainder, so every pool row is pseudo-labeled exactly once.

    Returns the model and the fraud probability each pool row received in the
    round it was chopped.
    """
    X_l = as_matrix(X_labeled)
    y_l = np.asarray(y_labeled, dtype=np.int8)
    X_p = np.asarray(X_pool, dtype=np.float64).reshape(-1, X_l.shape[1])
    if X_l.shape[0] == 0:
        raise ValueError("Chopper needs a non-empty labeled set")
    n_pool = X_p.shape[0]
    step = chunk_size(cfg.chunk_fraction, n_pool) if n_pool else 0
    remaining = np.arange(n_pool)
    chop_order = []
    chop_round = np.zeros(n_pool, dtype=np.int64)
    pool_fraud = np.full(n_pool, np.nan)
    pseudo = np.full(n_pool, -1, dtype=np.int8)
    X_train, y_train = X_l, y_l
    rounds = 0
    while remaining.size:
        rounds += 1
        name = cfg.first_learner if rounds == 1 else cfg.second_learner
        model = train_learner(name, X_train, y_train, learners, make_rng(child_seed(seed, rounds)))
        p = model.predict_proba(X_p[remaining])
        ranked = np.lexsort((remaining, -margins(p)))
        last_round = cfg.max_iterations is not None and rounds >= cfg.max_iterations
        take = ranked if last_round else ranked[:step]
        chosen = remaining[take]
        labels = hard_labels(p[take])
        chop_order.append(chosen)
        chop_round[chosen] = rounds
        pool_fraud[chosen] = p[take]
        pseudo[chosen] = labels
        X_train = np.vstack([X_train, X_p[chosen]])
        y_train = np.concatenate([y_train, labels])
        keep = np.ones(remaining.size, dtype=bool)
        keep[take] = False
        remaining = remaining[keep]
    final = train_learner(cfg.second_learner, X_train, y_train, learners, make_rng(child_seed(seed, rounds + 1)))
    order = np.concatenate(chop_order) if chop_order else np.empty(0, dtype=np.int64)
    model = ChopperModel(final, order, chop_round, pool_fraud, pseudo, rounds)
    return model, pool_fraud


def ssc_predict(model: ProbabilisticClassifier, x) -> ClassDistribution:
    """Distribution for one instance from any trained SSC (or cost-sensitive) model."""
    return model.distribution(x)
