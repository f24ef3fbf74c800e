from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .distribution import ClassDistribution, ProbabilisticClassifier, as_matrix
from .tree import TreeModel, _single_class, grow_tree

# hard cap on max_depth; the tuning grid tops out at 50
MAX_DEPTH_BOUND = 1000


@dataclass(frozen=True)
class ForestConfig:
    """Random forest settings.

    ``max_features`` is ``"sqrt"`` (ceil of the square root of the feature
    count), ``"all"`` (no subsampling) or an explicit integer. ``max_depth``
    of ``None`` means unlimited.
    """

    n_trees: int = 100
    max_depth: Optional[int] = 12
    min_leaf: int = 1
    max_features: Union[str, int] = "sqrt"
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth is not None and not 1 <= self.max_depth <= MAX_DEPTH_BOUND:
            raise ValueError(f"max_depth must lie in [1, {MAX_DEPTH_BOUND}] or be None")
        if isinstance(self.max_features, str) and self.max_features not in ("sqrt", "all"):
            raise ValueError(f"max_features must be 'sqrt', 'all' or an int, got {self.max_features!r}")

    def features_per_split(self, d: int) -> int:
        if self.max_features == "sqrt":
            return max(1, math.ceil(math.sqrt(d)))
        if self.max_features == "all":
            return d
        return max(1, min(int(self.max_features), d))


@dataclass(frozen=True, eq=False)
class ForestModel(ProbabilisticClassifier):
    trees: tuple
    config: ForestConfig
    only_class: Optional[int] = None

    def predict_proba(self, X) -> np.ndarray:
        X = as_matrix(X)
        if self.only_class is not None:
            return np.full(X.shape[0], float(self.only_class))
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict_proba(X)
        return total / len(self.trees)


def forest_train(X, y, cfg: ForestConfig = ForestConfig(), rng: Optional[np.random.Generator] = None) -> ForestModel:
    X = as_matrix(X)
    y = np.asarray(y)
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot train a forest on an empty training set")
    if rng is None:
        rng = np.random.default_rng(0)
    m = cfg.features_per_split(d)
    trees = []
    for _ in range(cfg.n_trees):
        idx = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        root = grow_tree(
            X[idx], y[idx], min_leaf=cfg.min_leaf, max_depth=cfg.max_depth, max_features=m, rng=rng
        )
        trees.append(TreeModel.from_root(root))
    return ForestModel(tuple(trees), cfg, only_class=_single_class(y))


def forest_predict(model: ForestModel, x) -> ClassDistribution:
    return model.distribution(x)
