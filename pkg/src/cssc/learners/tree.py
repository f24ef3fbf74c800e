"""C4.5-style decision tree: gain-ratio numeric splits and pessimistic pruning.

The grower is shared with the random forest. A forest tree is the same
unpruned tree built on a bootstrap sample with a random feature window at
each split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Optional

import numpy as np

from .distribution import ClassDistribution, ProbabilisticClassifier, as_matrix

# gains at or below this count as no gain
ZERO_GAIN = 1e-10
# attribute filter slack: candidates need gain >= average gain - GAIN_SLACK
GAIN_SLACK = 1e-3
# a subtree is kept only if it beats the leaf estimate by more than this many errors
PRUNE_MARGIN = 0.1


@dataclass(frozen=True)
class TreeConfig:
    confidence_factor: float = 0.75
    min_leaf: int = 2
    prune: bool = True
    max_depth: Optional[int] = None

    def __post_init__(self):
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if not 0.0 < self.confidence_factor <= 1.0:
            raise ValueError("confidence_factor must lie in (0, 1]")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")


class _Node:
    __slots__ = ("counts", "depth", "feature", "threshold", "left", "right")

    def __init__(self, counts, depth):
        self.counts = counts
        self.depth = depth
        self.feature = -1
        self.threshold = math.nan
        self.left: Optional[_Node] = None
        self.right: Optional[_Node] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _entropy(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return h


def split_candidate(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best binary threshold on one numeric feature.

    Returns ``(gain, gain_ratio, threshold)`` or ``None`` when no split leaves
    ``min_leaf`` instances on both sides with positive corrected gain. The gain
    carries the C4.5 penalty ``log2(#cut points) / n`` for numeric attributes.
    """
    n = x.shape[0]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cuts = np.flatnonzero(xs[1:] > xs[:-1]) + 1
    if cuts.size == 0:
        return None
    n_cut_points = cuts.size
    cuts = cuts[(cuts >= min_leaf) & (n - cuts >= min_leaf)]
    if cuts.size == 0:
        return None
    cum_fraud = np.cumsum(y[order])
    total_fraud = cum_fraud[-1]
    n_left = cuts.astype(np.float64)
    n_right = n - n_left
    f_left = cum_fraud[cuts - 1]
    f_right = total_fraud - f_left
    parent = _entropy(np.array([total_fraud / n]))[0]
    children = (n_left * _entropy(f_left / n_left) + n_right * _entropy(f_right / n_right)) / n
    gains = parent - children
    best = int(np.argmax(gains))
    gain = gains[best] - math.log2(n_cut_points) / n
    if gain <= ZERO_GAIN:
        return None
    split_info = _entropy(np.array([n_left[best] / n]))[0]
    lo, hi = xs[cuts[best] - 1], xs[cuts[best]]
    threshold = (lo + hi) / 2.0
    if not lo <= threshold < hi:
        threshold = lo
    return gain, gain / split_info, float(threshold)


def _choose_split(X, y, min_leaf, features):
    found = {}
    for f in features:
        cand = split_candidate(X[:, f], y, min_leaf)
        if cand is not None:
            found[int(f)] = cand
    return found


def _select(found: dict):
    if not found:
        return None
    avg_gain = sum(c[0] for c in found.values()) / len(found)
    eligible = [(f, c) for f, c in found.items() if c[0] >= avg_gain - GAIN_SLACK]
    best_ratio = max(c[1] for _, c in eligible)
    f = min(f for f, c in eligible if c[1] == best_ratio)
    return f, found[f][2]


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    min_leaf: int = 2,
    max_depth: Optional[int] = None,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> _Node:
    """Grow an unpruned gain-ratio tree.

    With ``max_features`` below the feature count, each split first scores a
    random window of that many features and keeps drawing further features
    one at a time until one yields a valid split or all are exhausted.
    """
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot grow a tree on an empty training set")
    subsample = max_features is not None and max_features < d
    if subsample and rng is None:
        raise ValueError("feature subsampling requires an rng")
    y = np.asarray(y, dtype=np.int64)
    root = _Node((float(n - y.sum()), float(y.sum())), 0)
    stack = [(root, np.arange(n))]
    while stack:
        node, idx = stack.pop()
        m = idx.size
        n_fraud = node.counts[1]
        if n_fraud == 0 or n_fraud == m or m < 2 * min_leaf:
            continue
        if max_depth is not None and node.depth >= max_depth:
            continue
        Xn, yn = X[idx], y[idx]
        if subsample:
            order = rng.permutation(d)
            found = _choose_split(Xn, yn, min_leaf, order[:max_features])
            pos = max_features
            while not found and pos < d:
                found = _choose_split(Xn, yn, min_leaf, order[pos : pos + 1])
                pos += 1
        else:
            found = _choose_split(Xn, yn, min_leaf, range(d))
        choice = _select(found)
        if choice is None:
            continue
        f, threshold = choice
        go_left = Xn[:, f] <= threshold
        left_idx, right_idx = idx[go_left], idx[~go_left]
        node.feature, node.threshold = f, threshold
        node.left = _Node((float(left_idx.size - yn[go_left].sum()), float(yn[go_left].sum())), node.depth + 1)
        node.right = _Node((float(right_idx.size - yn[~go_left].sum()), float(yn[~go_left].sum())), node.depth + 1)
        stack.append((node.right, right_idx))
        stack.append((node.left, left_idx))
    return root


def added_errors(n: float, e: float, cf: float) -> float:
    """Pessimistic extra errors for a leaf with ``n`` instances and ``e`` errors.

    Upper confidence limit of the binomial error rate at confidence ``cf``
    (normal approximation with continuity correction). Confidence factors
    above 0.5 leave the estimate unchanged, as in the J48 learner.
    """
    if cf > 0.5:
        return 0.0
    if e < 1:
        base = n * (1.0 - cf ** (1.0 / n))
        if e == 0:
            return base
        return base + e * (added_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = NormalDist().inv_cdf(1.0 - cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n)
    return r * n - e


def _leaf_estimate(node: _Node, cf: float) -> float:
    n = node.counts[0] + node.counts[1]
    e = min(node.counts)
    return e + added_errors(n, e, cf)


def prune_tree(root: _Node, cf: float) -> _Node:
    """Bottom-up subtree replacement (no subtree raising)."""
    order = []
    stack = [root]
    while stack:
        node = stack.pop()
        order.append(node)
        if not node.is_leaf:
            stack.append(node.left)
            stack.append(node.right)
    subtree_errors = {}
    for node in reversed(order):
        as_leaf = _leaf_estimate(node, cf)
        if node.is_leaf:
            subtree_errors[id(node)] = as_leaf
            continue
        as_tree = subtree_errors[id(node.left)] + subtree_errors[id(node.right)]
        if as_leaf <= as_tree + PRUNE_MARGIN:
            node.left = node.right = None
            node.feature, node.threshold = -1, math.nan
            subtree_errors[id(node)] = as_leaf
        else:
            subtree_errors[id(node)] = as_tree
    return root


@dataclass(frozen=True, eq=False)
class TreeModel(ProbabilisticClassifier):
    """Flattened binary tree. Node 0 is the root; leaves have ``feature == -1``.

    ``counts[i]`` holds the (normal, fraud) training counts at node ``i``. Leaf
    probabilities are Laplace-corrected unless the training data held a single
    class (``only_class``), in which case that class gets probability 1.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray
    only_class: Optional[int] = None
    config: Optional[TreeConfig] = None

    @classmethod
    def from_root(cls, root: _Node, only_class=None, config=None) -> "TreeModel":
        nodes = []
        index = {}
        stack = [root]
        while stack:
            node = stack.pop()
            index[id(node)] = len(nodes)
            nodes.append(node)
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)
        feature = np.array([nd.feature for nd in nodes], dtype=np.int64)
        threshold = np.array([nd.threshold for nd in nodes], dtype=np.float64)
        left = np.array([index[id(nd.left)] if not nd.is_leaf else -1 for nd in nodes], dtype=np.int64)
        right = np.array([index[id(nd.right)] if not nd.is_leaf else -1 for nd in nodes], dtype=np.int64)
        counts = np.array([nd.counts for nd in nodes], dtype=np.float64).reshape(-1, 2)
        return cls(feature, threshold, left, right, counts, only_class, config)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def leaf_mask(self) -> np.ndarray:
        return self.feature < 0

    def leaf_sizes(self) -> np.ndarray:
        return self.counts[self.leaf_mask].sum(axis=1)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        """Index of the leaf reached by each row of ``X``."""
        X = as_matrix(X)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.arange(X.shape[0])
        while active.size:
            nd = node[active]
            internal = self.feature[nd] >= 0
            active, nd = active[internal], nd[internal]
            if not active.size:
                break
            go_left = X[active, self.feature[nd]] <= self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
        return node

    def leaf_fraud_probability(self) -> np.ndarray:
        if self.only_class is not None:
            return np.full(self.n_nodes, float(self.only_class))
        n = self.counts.sum(axis=1)
        return (self.counts[:, 1] + 1.0) / (n + 2.0)

    def predict_proba(self, X) -> np.ndarray:
        return self.leaf_fraud_probability()[self.apply(X)]


def _single_class(y) -> Optional[int]:
    present = np.unique(y)
    return int(present[0]) if present.size == 1 else None


def tree_train(X, y, cfg: TreeConfig = TreeConfig()) -> TreeModel:
    X = as_matrix(X)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("cannot train a tree on an empty training set")
    root = grow_tree(X, y, min_leaf=cfg.min_leaf, max_depth=cfg.max_depth)
    if cfg.prune:
        root = prune_tree(root, cfg.confidence_factor)
    return TreeModel.from_root(root, only_class=_single_class(y), config=cfg)


def tree_predict(model: TreeModel, x) -> ClassDistribution:
    return model.distribution(x)
