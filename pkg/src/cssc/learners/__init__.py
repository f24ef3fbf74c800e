"""Supervised base learners with probabilistic output, and a name registry."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distribution import ClassDistribution, ProbabilisticClassifier, hard_labels
from .forest import ForestConfig, ForestModel, forest_predict, forest_train
from .kdtree import KdTree, kd_query
from .knn import KnnConfig, KnnModel, knn_predict, knn_train, weighted_vote
from .naive_bayes import NbConfig, NbModel, nb_predict, nb_train
from .tree import TreeConfig, TreeModel, tree_predict, tree_train

LEARNERS = ("nb", "j48", "rf", "knn")


@dataclass(frozen=True)
class LearnerConfigs:
    """Hyper-parameters for every learner a pipeline may reference."""

    nb: NbConfig = field(default_factory=NbConfig)
    j48: TreeConfig = field(default_factory=TreeConfig)
    rf: ForestConfig = field(default_factory=ForestConfig)
    knn: KnnConfig = field(default_factory=KnnConfig)


def check_learner(name: str) -> str:
    if name not in LEARNERS:
        raise ValueError(f"unknown learner {name!r}; expected one of {', '.join(LEARNERS)}")
    return name


def train_learner(
    name: str,
    X,
    y,
    configs: LearnerConfigs = LearnerConfigs(),
    rng: Optional[np.random.Generator] = None,
) -> ProbabilisticClassifier:
    check_learner(name)
    if name == "nb":
        return nb_train(X, y, configs.nb)
    if name == "j48":
        return tree_train(X, y, configs.j48)
    if name == "rf":
        return forest_train(X, y, configs.rf, rng)
    return knn_train(X, y, None, configs.knn)


__all__ = [
    "LEARNERS",
    "ClassDistribution",
    "ForestConfig",
    "ForestModel",
    "KdTree",
    "KnnConfig",
    "KnnModel",
    "LearnerConfigs",
    "NbConfig",
    "NbModel",
    "ProbabilisticClassifier",
    "TreeConfig",
    "TreeModel",
    "check_learner",
    "forest_predict",
    "forest_train",
    "hard_labels",
    "kd_query",
    "knn_predict",
    "knn_train",
    "nb_predict",
    "nb_train",
    "train_learner",
    "tree_predict",
    "tree_train",
    "weighted_vote",
]
