from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import blobs
from cssc.cost import (
    CostMatrix,
    MetaCostConfig,
    bagged_fraud_probabilities,
    conditional_risk,
    metacost_relabel,
    metacost_train,
    min_risk_class,
    min_risk_labels,
    total_cost,
)
from cssc.dataset import Label
from cssc.evaluation import ConfusionMatrix
from cssc.learners import ClassDistribution, ForestConfig, LearnerConfigs
from cssc.pipeline import PipelineSpec, reference_pipelines
from cssc.semi_supervised import ChopperConfig, YatsiConfig

FAST = LearnerConfigs(rf=ForestConfig(n_trees=3, max_depth=4))


def yatsi_nb(**kw):
    return PipelineSpec(name="t", ssc="yatsi", yatsi=YatsiConfig("nb", 3, 1.0), learners=FAST, **kw)


class TestCostMatrix:
    def test_lookup(self):
        cm = CostMatrix(c_fn=4.0)
        assert cm.cost(Label.NORMAL, Label.FRAUD) == 4.0
        assert cm.cost(Label.FRAUD, Label.NORMAL) == 1.0
        assert cm.cost(Label.FRAUD, Label.FRAUD) == 0.0
        assert cm.cost(Label.NORMAL, Label.NORMAL) == 0.0

    def test_negative(self):
        with pytest.raises(ValueError):
            CostMatrix(c_fn=-1.0)

    def test_total_cost_hand(self):
        conf = ConfusionMatrix(tp=30, fn=7, fp=11, tn=200)
        assert total_cost(conf, CostMatrix(c_fn=3.0)) == 7 * 3 + 11
        assert total_cost(conf, CostMatrix(c_fn=3.0, c_fp=2.0)) == 7 * 3 + 22

    def test_total_cost_ignores_diagonal(self):
        conf = ConfusionMatrix(tp=5, fn=1, fp=1, tn=5)
        assert total_cost(conf, CostMatrix(c_fn=2.0, c_tp=9.0, c_tn=9.0)) == 3.0


class TestMinRisk:
    def test_conditional_risk(self):
        d = ClassDistribution(0.7, 0.3)
        cm = CostMatrix(c_fn=5.0)
        assert conditional_risk(d, Label.FRAUD, cm) == pytest.approx(0.7)
        assert conditional_risk(d, Label.NORMAL, cm) == pytest.approx(1.5)
        assert min_risk_class(d, cm) is Label.FRAUD

    @pytest.mark.parametrize("c_fn", [2, 3, 4, 5])
    def test_threshold_law_exact(self, c_fn):
        p = np.arange(10001) / 10000
        got = min_risk_labels(p, CostMatrix(c_fn=c_fn))
        expected = [Fraction(float(v)) >= Fraction(1, 1 + c_fn) for v in p]
        assert got.astype(bool).tolist() == expected

    @pytest.mark.parametrize("c_fn", [2.0, 3.0, 4.0, 5.0, 9.5])
    def test_boundary_neighbourhood(self, c_fn):
        b = 1.0 / (1.0 + c_fn)
        ps = np.array([np.nextafter(b, 0.0), b, np.nextafter(b, 1.0)])
        exact = [Fraction(float(v)) >= 1 / (1 + Fraction(c_fn)) for v in ps]
        assert min_risk_labels(ps, CostMatrix(c_fn=c_fn)).astype(bool).tolist() == exact

    def test_exact_tie_goes_to_fraud(self):
        cm = CostMatrix(c_fn=3.0)
        assert min_risk_class(ClassDistribution(0.75, 0.25), cm) is Label.FRAUD
        assert min_risk_labels([0.25], cm)[0] == 1

    @given(st.floats(0.0, 1.0), st.floats(0.0, 10.0), st.floats(0.0, 10.0))
    def test_vectorized_matches_scalar(self, p, c_fn, c_fp):
        cm = CostMatrix(c_fn=c_fn, c_fp=c_fp)
        assert min_risk_labels([p], cm)[0] == min_risk_class(ClassDistribution(1.0 - p, p), cm)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50))
    def test_unit_costs_are_argmax(self, ps):
        p = np.array(ps)
        np.testing.assert_array_equal(min_risk_labels(p, CostMatrix(c_fn=1.0)), (p >= 0.5).astype(np.int8))

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50))
    def test_fraud_set_grows_with_penalty(self, ps):
        sets = [min_risk_labels(ps, CostMatrix(c_fn=c)).astype(bool) for c in (2, 3, 4, 5)]
        for lo, hi in zip(sets, sets[1:]):
            assert np.all(hi | ~lo)

    def test_scaling_invariance(self):
        p = np.random.default_rng(0).random(500)
        cm = CostMatrix(c_fn=3.0)
        np.testing.assert_array_equal(min_risk_labels(p, cm), min_risk_labels(p, cm.scaled(7.5)))


class TestBagging:
    def test_no_bootstrap_single_bag_is_plain_fit(self):
        X, y = blobs(30, 8, shift=1.0)
        pipe = yatsi_nb(metacost=None)
        cfg = MetaCostConfig(n_bags=1, bootstrap=False)
        got = bagged_fraud_probabilities(X, y, np.empty((0, 9)), pipe, cfg)
        want = pipe.fit_ssc(X, y, np.empty((0, 9))).predict_proba(X)
        np.testing.assert_array_equal(got, want)

    def test_deterministic_and_seed_dependent(self):
        X, y = blobs(30, 8, shift=1.0)
        U, _ = blobs(20, 4, seed=5)
        pipe = yatsi_nb(metacost=None)
        a = bagged_fraud_probabilities(X, y, U, pipe, MetaCostConfig(n_bags=4), seed=1)
        b = bagged_fraud_probabilities(X, y, U, pipe, MetaCostConfig(n_bags=4), seed=1)
        c = bagged_fraud_probabilities(X, y, U, pipe, MetaCostConfig(n_bags=4), seed=2)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)
        assert np.all((a >= 0) & (a <= 1))

    def test_out_of_bag_option(self):
        X, y = blobs(30, 8, shift=1.0)
        pipe = yatsi_nb(metacost=None)
        p = bagged_fraud_probabilities(X, y, np.empty((0, 9)), pipe, MetaCostConfig(n_bags=5, use_all_models=False))
        assert p.shape == (38,) and np.all(np.isfinite(p))

    def test_batch_size_irrelevant(self):
        X, y = blobs(30, 8, shift=1.0)
        pipe = yatsi_nb(metacost=None)
        a = bagged_fraud_probabilities(X, y, np.empty((0, 9)), pipe, MetaCostConfig(n_bags=2, batch_size=1))
        b = bagged_fraud_probabilities(X, y, np.empty((0, 9)), pipe, MetaCostConfig(n_bags=2, batch_size=1000))
        np.testing.assert_array_equal(a, b)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MetaCostConfig(n_bags=0)
        with pytest.raises(ValueError):
            MetaCostConfig(bag_size=0)


class TestMetaCost:
    def test_relabel_keeps_features(self):
        X, y = blobs(30, 8, shift=0.8)
        pipe = yatsi_nb(metacost=None)
        Xc = X.copy()
        labels = metacost_relabel(X, y, np.empty((0, 9)), pipe, CostMatrix(c_fn=5.0), MetaCostConfig(n_bags=3))
        np.testing.assert_array_equal(X, Xc)
        assert labels.shape == y.shape and set(labels.tolist()) <= {0, 1}

    def test_precomputed_bagged_short_circuits(self):
        X, y = blobs(30, 8)
        bagged = np.linspace(0, 1, 38)
        got = metacost_relabel(X, y, None, None, CostMatrix(c_fn=4.0), bagged=bagged)
        np.testing.assert_array_equal(got, (bagged >= 0.2).astype(np.int8))

    def test_final_model_trained_on_relabeled(self):
        X, y = blobs(30, 8, shift=0.8)
        pipe = yatsi_nb(metacost=None)
        cfg = MetaCostConfig(n_bags=3)
        m = metacost_train(X, y, np.empty((0, 9)), pipe, CostMatrix(c_fn=3.0), cfg, seed=2)
        bagged = bagged_fraud_probabilities(X, y, np.empty((0, 9)), pipe, cfg, seed=2)
        np.testing.assert_array_equal(m.bagged, bagged)
        np.testing.assert_array_equal(m.relabeled, min_risk_labels(bagged, CostMatrix(c_fn=3.0)))
        np.testing.assert_array_equal(m.final.labels[: len(y)], m.relabeled)

    def test_cache_equivalence(self):
        X, y = blobs(30, 8, shift=0.8)
        U, _ = blobs(10, 2, seed=8)
        pipe = yatsi_nb(metacost=None)
        cfg = MetaCostConfig(n_bags=3)
        bagged = bagged_fraud_probabilities(X, y, U, pipe, cfg)
        cache = {}
        for c in (2.0, 3.0, 4.0, 5.0):
            cm = CostMatrix(c_fn=c)
            cached = metacost_train(X, y, U, pipe, cm, cfg, bagged=bagged, cache=cache)
            fresh = metacost_train(X, y, U, pipe, cm, cfg)
            np.testing.assert_array_equal(cached.predict_proba(X), fresh.predict_proba(X))
            np.testing.assert_array_equal(cached.predict(X), fresh.predict(X))
        assert 1 <= len(cache) <= 4

    def test_cache_reuses_identical_relabeling(self):
        X, y = blobs(10, 10, shift=6.0)
        pipe = yatsi_nb(metacost=None)
        bagged = np.r_[np.zeros(10), np.ones(10)]
        cache = {}
        a = metacost_train(X, y, None, pipe, CostMatrix(c_fn=2.0), bagged=bagged, cache=cache)
        b = metacost_train(X, y, None, pipe, CostMatrix(c_fn=5.0), bagged=bagged, cache=cache)
        assert a.final is b.final and len(cache) == 1

    def test_min_risk_predict(self):
        X, y = blobs(30, 8, shift=0.8)
        pipe = yatsi_nb(metacost=None)
        cm = CostMatrix(c_fn=5.0)
        m = metacost_train(X, y, None, pipe, cm, MetaCostConfig(n_bags=2), min_risk_predict=True)
        p = m.predict_proba(X)
        np.testing.assert_array_equal(m.predict(X), (p >= 1 / 6).astype(np.int8))


class TestPipelineSpec:
    def test_reference_settings(self):
        specs = reference_pipelines()
        assert [s.name for s in specs] == ["csl-yatsi-knn", "csl-yatsi-nb", "csl-yatsi-j48", "csl-chopper"]
        assert all(s.learners.rf.n_trees == 100 and s.learners.rf.max_depth == 12 for s in specs)
        assert specs[2].learners.j48.confidence_factor == 0.75
        assert specs[3].chopper.first_learner == "nb" and specs[3].chopper.second_learner == "rf"
        assert [s.name for s in reference_pipelines(None)][0] == "yatsi-knn"

    def test_transductive_default(self):
        assert PipelineSpec(ssc="chopper").is_transductive
        assert not PipelineSpec(ssc="yatsi").is_transductive
        assert PipelineSpec(ssc="yatsi", transductive=True).is_transductive

    def test_with_params(self):
        spec = PipelineSpec().with_params({"rf.n_trees": 7, "chopper.chunk_fraction": 0.5, "metacost.n_bags": 2})
        assert spec.learners.rf.n_trees == 7
        assert spec.chopper.chunk_fraction == 0.5
        assert spec.metacost.n_bags == 2
        assert PipelineSpec(metacost=None).with_params({"metacost.n_bags": 3}).metacost is None
        with pytest.raises(KeyError):
            PipelineSpec(metacost=None).with_params({"metacost.bags": 3})

    def test_with_params_rejects_unknown(self):
        with pytest.raises(KeyError):
            PipelineSpec().with_params({"rf.trees": 3})
        with pytest.raises(KeyError):
            PipelineSpec().with_params({"svm.c": 1})
        with pytest.raises(ValueError):
            PipelineSpec().with_params({"rf.n_trees": 0})

    def test_dict_round_trip(self):
        for spec in reference_pipelines() + reference_pipelines(None):
            assert PipelineSpec.from_dict(spec.to_dict()) == spec

    def test_unknown_ssc(self):
        with pytest.raises(ValueError):
            PipelineSpec(ssc="tri-training")

    def test_plain_fit_has_no_metacost(self):
        X, y = blobs(20, 6)
        spec = PipelineSpec(ssc="chopper", chopper=ChopperConfig("nb", "nb"), metacost=None, learners=FAST)
        with pytest.raises(ValueError):
            spec.bagged(X, y, None)
        m = spec.fit(X, y)
        assert m.predict(X).shape == y.shape

    def test_csl_fit_deterministic(self):
        X, y = blobs(20, 6, shift=1.0)
        U, _ = blobs(15, 3, seed=4)
        spec = PipelineSpec(
            ssc="chopper", chopper=ChopperConfig("nb", "rf", 0.5), metacost=MetaCostConfig(n_bags=2), learners=FAST
        )
        a = spec.fit(X, y, U, seed=(1, 2)).predict_proba(U)
        b = spec.fit(X, y, U, seed=(1, 2)).predict_proba(U)
        np.testing.assert_array_equal(a, b)
