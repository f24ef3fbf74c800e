import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import blobs
from cssc.dataset import Instance, Label
from cssc.learners import (
    ClassDistribution,
    ForestConfig,
    KdTree,
    KnnConfig,
    LearnerConfigs,
    NbConfig,
    TreeConfig,
    forest_predict,
    forest_train,
    kd_query,
    knn_predict,
    knn_train,
    nb_predict,
    nb_train,
    train_learner,
    tree_predict,
    tree_train,
    weighted_vote,
)
from cssc.learners.naive_bayes import VARIANCE_FLOOR
from cssc.learners.tree import added_errors, grow_tree, split_candidate


def entropy(counts):
    n = sum(counts)
    return -sum(c / n * math.log2(c / n) for c in counts if c)


class TestClassDistribution:
    def test_sum_invariant(self):
        with pytest.raises(ValueError):
            ClassDistribution(0.6, 0.6)
        with pytest.raises(ValueError):
            ClassDistribution(-0.1, 1.1)

    def test_tie_goes_to_fraud(self):
        assert ClassDistribution(0.5, 0.5).label is Label.FRAUD
        assert ClassDistribution(0.51, 0.49).label is Label.NORMAL


class TestNaiveBayes:
    def test_hand_parameters(self):
        X = np.zeros((4, 9))
        X[:, 0] = [1.0, 3.0, 10.0, 14.0]
        X[:, 1] = [2.0, 2.0, 0.0, 4.0]
        y = np.array([0, 0, 1, 1])
        m = nb_train(X, y)
        np.testing.assert_allclose(m.means[:, 0], [2.0, 12.0])
        np.testing.assert_allclose(m.variances[:, 0], [1.0, 4.0])
        # constant feature hits the floor
        assert m.variances[0, 1] == VARIANCE_FLOOR
        np.testing.assert_allclose(m.variances[1, 1], 4.0)
        np.testing.assert_allclose(m.priors, [0.5, 0.5])

    def test_laplace_priors(self):
        X, y = blobs(7, 1)
        m = nb_train(X, y)
        np.testing.assert_allclose(m.priors, [8 / 10, 2 / 10])
        assert m.priors.sum() == pytest.approx(1.0)

    def test_hand_posterior(self):
        X = np.zeros((4, 9))
        X[:, 0] = [-1.0, 1.0, 3.0, 5.0]
        y = np.array([0, 0, 1, 1])
        m = nb_train(X, y, NbConfig(var_floor=1.0))
        x = np.zeros(9)
        x[0] = 1.5
        # every feature but the first has equal per-class variance and mean, so cancels
        l0 = math.exp(-0.5 * (1.5 - 0.0) ** 2 / 1.0) / math.sqrt(1.0)
        l1 = math.exp(-0.5 * (1.5 - 4.0) ** 2 / 1.0) / math.sqrt(1.0)
        expected = 0.5 * l1 / (0.5 * l0 + 0.5 * l1)
        assert nb_predict(m, x).p_fraud == pytest.approx(expected, rel=1e-12)

    def test_symmetric_midpoint(self):
        X = np.zeros((4, 9))
        X[:, 0] = [-3.0, -1.0, 1.0, 3.0]
        y = np.array([0, 0, 1, 1])
        d = nb_predict(nb_train(X, y), np.zeros(9))
        assert d.p_fraud == pytest.approx(0.5, abs=1e-12)

    def test_far_inside_cluster(self):
        X, y = blobs(40, 40, shift=4.0)
        m = nb_train(X, y)
        assert nb_predict(m, np.full(9, 4.0)).p_fraud > 0.99
        assert nb_predict(m, np.zeros(9)).p_normal > 0.99

    def test_single_class(self):
        X, _ = blobs(5, 0)
        for c in (0, 1):
            m = nb_train(X, np.full(5, c))
            d = nb_predict(m, np.full(9, 100.0))
            assert (d.p_normal, d.p_fraud) == ((1.0, 0.0) if c == 0 else (0.0, 1.0))
            assert m.priors.sum() == 1.0

    def test_empty(self):
        with pytest.raises(ValueError):
            nb_train(np.empty((0, 9)), np.empty(0))

    def test_extreme_queries_stay_finite(self):
        X, y = blobs(20, 20)
        p = nb_train(X, y).predict_proba(np.full((2, 9), 1e6) * [[1], [-1]])
        assert np.all(np.isfinite(p)) and np.all((p >= 0) & (p <= 1))


def brute_best_split(x, y, min_leaf):
    """Exhaustive C4.5 threshold search on one feature."""
    n = len(x)
    values = sorted(set(x))
    if len(values) < 2:
        return None
    parent = entropy([np.sum(y == 0), np.sum(y == 1)])
    best = None
    for lo, hi in zip(values, values[1:]):
        t = (lo + hi) / 2
        left, right = y[x <= t], y[x > t]
        if len(left) < min_leaf or len(right) < min_leaf:
            continue
        child = (len(left) * entropy([np.sum(left == 0), np.sum(left == 1)]) + len(right) * entropy(
            [np.sum(right == 0), np.sum(right == 1)]
        )) / n
        gain = parent - child
        if best is None or gain > best[0] + 1e-15:
            best = (gain, t, len(left))
    if best is None:
        return None
    gain = best[0] - math.log2(len(values) - 1) / n
    if gain <= 1e-10:
        return None
    split_info = entropy([best[2], n - best[2]])
    return gain, gain / split_info, best[1]


class TestTree:
    def test_pure_data_single_leaf(self):
        X, _ = blobs(10, 0)
        m = tree_train(X, np.zeros(10))
        assert m.n_nodes == 1
        assert np.all(m.predict_proba(X) == 0.0)

    def test_separable_threshold_in_gap(self):
        x = np.array([0.1, 0.4, 0.7, 1.0, 1.3, 2.6, 2.9, 3.3, 3.8])
        y = np.array([0, 0, 0, 0, 0, 1, 1, 1, 1])
        X = np.zeros((9, 9))
        X[:, 3] = x
        m = tree_train(X, y, TreeConfig(min_leaf=1))
        assert m.feature[0] == 3
        assert 1.3 < m.threshold[0] < 2.6
        assert m.threshold[0] == pytest.approx((1.3 + 2.6) / 2)

    @given(st.lists(st.integers(0, 8), min_size=2, max_size=20), st.integers(0, 2**20), st.integers(1, 4))
    def test_split_matches_exhaustive_oracle(self, xs, seed, min_leaf):
        rng = np.random.default_rng(seed)
        x = np.array(xs, dtype=float)
        y = rng.integers(0, 2, size=len(x))
        got = split_candidate(x, y, min_leaf)
        want = brute_best_split(x, y, min_leaf)
        if want is None:
            assert got is None
        else:
            assert got is not None
            assert got[0] == pytest.approx(want[0], abs=1e-12)
            assert got[1] == pytest.approx(want[1], abs=1e-12)
            assert got[2] == want[2]

    def test_min_leaf_larger_than_data(self):
        X, y = blobs(3, 2)
        m = tree_train(X, y, TreeConfig(min_leaf=10))
        assert m.n_nodes == 1
        assert m.predict(X).tolist() == [0] * 5

    @given(st.integers(0, 2**20), st.integers(1, 5), st.booleans())
    def test_min_leaf_invariant(self, seed, min_leaf, prune):
        X, y = blobs(30, 15, seed=seed, shift=0.8)
        m = tree_train(X, y, TreeConfig(min_leaf=min_leaf, prune=prune))
        assert np.all(m.leaf_sizes() >= min(min_leaf, len(y)))
        assert np.all(np.isfinite(m.threshold[~m.leaf_mask]))

    def test_laplace_leaves(self):
        X = np.zeros((6, 9))
        X[:, 0] = np.arange(6)
        y = np.array([0, 0, 0, 1, 1, 1])
        m = tree_train(X, y, TreeConfig(min_leaf=1, prune=False))
        # two pure leaves of three: (0 + 1) / (3 + 2) and (3 + 1) / (3 + 2)
        assert sorted(set(m.predict_proba(X))) == [pytest.approx(0.2), pytest.approx(0.8)]

    def test_pruning_collapses_noise(self):
        rng = np.random.default_rng(5)
        X = rng.random((300, 9))
        flip = rng.random(300) < 0.2
        y = ((X[:, 0] > 0.5) ^ flip).astype(int)
        pruned = tree_train(X, y, TreeConfig(confidence_factor=0.25))
        full = tree_train(X, y, TreeConfig(prune=False))
        assert pruned.n_nodes < full.n_nodes

    def test_added_errors_reference_values(self):
        # upper 25% confidence limits used by C4.5 pruning
        assert added_errors(6, 0, 0.25) == pytest.approx(6 * (1 - 0.25 ** (1 / 6)))
        assert added_errors(10, 10, 0.25) == 0.0
        # Wilson upper bound, z = 0.6745 for 25%, f = 1.5 / 16, worked by hand
        assert added_errors(16, 1, 0.25) == pytest.approx(2.4757 - 1, abs=1e-3)
        assert added_errors(10, 3, 0.75) == 0.0

    def test_max_depth(self):
        X, y = blobs(60, 30, shift=0.5)
        assert tree_train(X, y, TreeConfig(prune=False, max_depth=2)).depth() <= 2

    def test_empty(self):
        with pytest.raises(ValueError):
            tree_train(np.empty((0, 9)), np.empty(0))

    def test_left_goes_at_or_below_threshold(self):
        X = np.zeros((4, 9))
        X[:, 0] = [0.0, 1.0, 2.0, 3.0]
        m = tree_train(X, [0, 0, 1, 1], TreeConfig(min_leaf=1, prune=False))
        q = np.zeros((1, 9))
        q[0, 0] = m.threshold[0]
        assert m.apply(q)[0] == m.left[0]

    def test_distribution_of_instance(self):
        X, y = blobs(20, 20, shift=4.0)
        m = tree_train(X, y)
        inst = Instance("b", "a", tuple(np.full(9, 4.0)), Label.UNLABELED)
        assert tree_predict(m, inst).label is Label.FRAUD


class TestForest:
    @pytest.mark.parametrize("seed", range(5))
    def test_single_tree_degeneracy(self, seed):
        X, y = blobs(25, 15, seed=seed, shift=0.7)
        tree = tree_train(X, y, TreeConfig(min_leaf=1, prune=False))
        cfg = ForestConfig(n_trees=1, max_depth=None, min_leaf=1, max_features="all", bootstrap=False)
        forest = forest_train(X, y, cfg, np.random.default_rng(seed))
        Q = np.random.default_rng(seed + 100).normal(size=(200, 9))
        np.testing.assert_array_equal(forest.predict_proba(Q), tree.predict_proba(Q))

    def test_same_seed_same_forest(self):
        X, y = blobs(30, 20, shift=1.0)
        cfg = ForestConfig(n_trees=5, max_depth=4)
        a = forest_train(X, y, cfg, np.random.default_rng(3))
        b = forest_train(X, y, cfg, np.random.default_rng(3))
        np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))
        c = forest_train(X, y, cfg, np.random.default_rng(4))
        assert not np.array_equal(a.predict_proba(X), c.predict_proba(X))

    def test_pure_class_prediction(self):
        X, _ = blobs(10, 0)
        m = forest_train(X, np.zeros(10), ForestConfig(n_trees=3))
        d = forest_predict(m, np.full(9, 50.0))
        assert (d.p_normal, d.p_fraud) == (1.0, 0.0)

    def test_depth_bound(self):
        X, y = blobs(60, 40, shift=0.3)
        m = forest_train(X, y, ForestConfig(n_trees=4, max_depth=3))
        assert max(t.depth() for t in m.trees) <= 3

    def test_features_per_split(self):
        assert ForestConfig().features_per_split(9) == 3
        assert ForestConfig(max_features="all").features_per_split(9) == 9
        assert ForestConfig(max_features=20).features_per_split(9) == 9

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ForestConfig(n_trees=0)
        with pytest.raises(ValueError):
            ForestConfig(max_depth=0)
        with pytest.raises(ValueError):
            ForestConfig(max_features="log2")

    def test_mean_of_tree_probabilities(self):
        X, y = blobs(30, 20, shift=1.0)
        m = forest_train(X, y, ForestConfig(n_trees=4, max_depth=5))
        mean = np.mean([t.predict_proba(X) for t in m.trees], axis=0)
        np.testing.assert_allclose(m.predict_proba(X), mean, rtol=0, atol=1e-15)


def brute_knn(points, x, k):
    d = ((points - x) ** 2).sum(axis=1)
    return np.lexsort((np.arange(len(points)), d))[:k]


class TestKdTree:
    def test_one_dimensional(self):
        tree = KdTree(np.array([[0.0], [1.0], [2.0]]), payloads=["p0", "p1", "p2"])
        assert kd_query(tree, np.array([0.9]), 1) == ["p1"]

    def test_clamp(self):
        tree = KdTree(np.eye(3, 9))
        assert sorted(kd_query(tree, np.zeros(9), 5)) == [0, 1, 2]

    def test_empty(self):
        with pytest.raises(ValueError):
            KdTree(np.empty((0, 9)))

    def test_ties_in_insertion_order(self):
        pts = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        assert kd_query(KdTree(pts, leaf_size=1), np.array([0.0]), 2) == [0, 1]

    @given(st.integers(1, 150), st.integers(1, 20), st.integers(1, 8), st.integers(0, 2**20), st.booleans())
    def test_matches_brute_force(self, n, k, leaf_size, seed, coarse):
        rng = np.random.default_rng(seed)
        pts = rng.integers(0, 3, size=(n, 9)).astype(float) if coarse else rng.normal(size=(n, 9))
        tree = KdTree(pts, leaf_size=leaf_size)
        Q = rng.normal(size=(5, 9))
        _, idx = tree.query_many(Q, k)
        for q, got in zip(Q, idx):
            assert got.tolist() == brute_knn(pts, q, k).tolist()


class TestKnn:
    def test_identity_query(self):
        X, y = blobs(5, 5)
        d = knn_predict(X, y, None, KnnConfig(k=1), X[7])
        assert (d.p_normal, d.p_fraud) == (0.0, 1.0)

    def test_weighted_tie_goes_to_fraud(self):
        X = np.zeros((4, 9))
        X[:, 0] = [0.0, 0.1, 0.2, 0.3]
        y = np.array([0, 0, 1, 1])
        d = knn_predict(X, y, [1.0, 1.0, 2.0, 0.0], KnnConfig(k=4), np.zeros(9))
        assert d.p_fraud == 0.5 and d.label is Label.FRAUD

    def test_unanimous(self):
        X = np.zeros((5, 9))
        X[:, 0] = np.arange(5)
        d = knn_predict(X, np.ones(5), None, KnnConfig(k=3), np.zeros(9))
        assert (d.p_normal, d.p_fraud) == (0.0, 1.0)

    def test_zero_total_weight(self):
        assert weighted_vote(np.array([[0, 1]]), np.array([[0.0, 0.0]]))[0] == 0.5

    def test_empty_reference(self):
        with pytest.raises(ValueError):
            knn_train(np.empty((0, 9)), np.empty(0))

    def test_negative_weight(self):
        with pytest.raises(ValueError):
            knn_train(np.zeros((1, 9)), [0], [-1.0])


@pytest.mark.parametrize("name", ["nb", "j48", "rf", "knn"])
def test_distributions_sum_to_one(name):
    X, y = blobs(30, 10, shift=1.0)
    cfgs = LearnerConfigs(rf=ForestConfig(n_trees=3, max_depth=4))
    m = train_learner(name, X, y, cfgs, np.random.default_rng(0))
    Q = np.random.default_rng(9).normal(scale=3.0, size=(100, 9))
    for q in Q[:20]:
        d = m.distribution(q)
        assert 0.0 <= d.p_fraud <= 1.0
        assert abs(d.p_normal + d.p_fraud - 1.0) <= 1e-9
    p = m.predict_proba(Q)
    assert np.all((p >= 0) & (p <= 1))


def test_unknown_learner():
    with pytest.raises(ValueError, match="unknown learner"):
        train_learner("svm", np.zeros((2, 9)), [0, 1])


def test_grow_tree_requires_rng_for_subsampling():
    X, y = blobs(5, 5)
    with pytest.raises(ValueError):
        grow_tree(X, y, max_features=3)
