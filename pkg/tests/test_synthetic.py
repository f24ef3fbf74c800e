import numpy as np
import pytest

from cssc.synthetic import SHIFT_PROFILES, MixtureSpec, bayes_error, hidden_labels, make_mixture


def test_counts():
    labeled, pool = make_mixture()
    assert (labeled.n_normal, labeled.n_fraud) == (787, 158)
    assert len(pool) == 8346 and pool.n_unlabeled == 8346
    assert set(labeled.bidder_ids).isdisjoint(pool.bidder_ids)


def test_separation():
    for profile in SHIFT_PROFILES:
        spec = MixtureSpec(separation=3.0, profile=profile)
        assert np.linalg.norm(spec.fraud_mean) == pytest.approx(3.0)


def test_bayes_error_closed_form():
    assert bayes_error(0.0, 0.2) == 0.2
    # equal priors: Phi(-delta / 2)
    assert bayes_error(2.0, 0.5) == pytest.approx(0.15865525393145707, rel=1e-12)
    assert MixtureSpec().bayes_error <= 0.02


def test_bayes_error_matches_monte_carlo():
    spec = MixtureSpec(n_labeled=945, n_unlabeled=200_000, separation=3.0, seed=2)
    _, pool = make_mixture(spec)
    y = hidden_labels(spec)
    mu = spec.fraud_mean
    # optimal rule for shared identity covariance
    score = pool.X @ mu - mu @ mu / 2
    pred = score >= np.log((1 - spec.fraud_prior) / spec.fraud_prior)
    assert np.mean(pred != (y == 1)) == pytest.approx(spec.bayes_error, abs=0.003)


def test_deterministic():
    a, b = make_mixture(MixtureSpec(n_unlabeled=50, seed=4)), make_mixture(MixtureSpec(n_unlabeled=50, seed=4))
    assert a[0] == b[0] and a[1] == b[1]


def test_validation():
    with pytest.raises(ValueError):
        MixtureSpec(profile="nope")
    with pytest.raises(ValueError):
        MixtureSpec(ratio=0.0)
