"""Gaussian-mixture stand-in for the shill-bidding data with a known Bayes error.

Both classes share the identity covariance; the fraud mean is offset from the
normal mean along a fixed direction so the Mahalanobis distance between them
is ``separation``. That makes the optimal error available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .dataset import N_FEATURES, Dataset, Label
from .seeding import child_seed, make_rng

# relative strength of each feature's signal. "focused" puts most of it on a
# few bidder-behaviour features; "spread" leaks it across almost all of them.
SHIFT_PROFILES = {
    "focused": (3.0, 2.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    "spread": (2.0, 1.5, 1.5, 1.0, 1.0, 1.0, 0.5, 0.5, 0.0),
}


def bayes_error(separation: float, fraud_prior: float) -> float:
    """Error of the optimal rule for two unit-covariance Gaussians at Mahalanobis distance ``separation``."""
    if separation <= 0:
        return min(fraud_prior, 1.0 - fraud_prior)
    pi1, pi0 = fraud_prior, 1.0 - fraud_prior
    c = math.log(pi0 / pi1)
    phi = NormalDist().cdf
    half = separation / 2.0
    return pi1 * phi(c / separation - half) + pi0 * phi(-c / separation - half)


@dataclass(frozen=True)
class MixtureSpec:
    n_labeled: int = 945
    n_unlabeled: int = 8346
    ratio: float = 5.0
    separation: float = 4.0
    seed: int = 0
    profile: str = "focused"

    def __post_init__(self):
        if self.profile not in SHIFT_PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; known: {', '.join(SHIFT_PROFILES)}")
        if self.n_labeled < 2 or self.n_unlabeled < 0 or self.ratio <= 0 or self.separation < 0:
            raise ValueError("invalid mixture parameters")

    @property
    def fraud_prior(self) -> float:
        return 1.0 / (1.0 + self.ratio)

    @property
    def fraud_mean(self) -> np.ndarray:
        shift = np.array(SHIFT_PROFILES[self.profile])
        return shift / np.linalg.norm(shift) * self.separation

    @property
    def bayes_error(self) -> float:
        return bayes_error(self.separation, self.fraud_prior)


def _draw(rng, n_normal: int, n_fraud: int, mean: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = rng.standard_normal((n_normal + n_fraud, N_FEATURES))
    X[n_normal:] += mean
    y = np.r_[np.full(n_normal, Label.NORMAL), np.full(n_fraud, Label.FRAUD)].astype(np.int8)
    order = rng.permutation(len(y))
    return X[order], y[order]


def make_mixture(spec: MixtureSpec = MixtureSpec()) -> tuple[Dataset, Dataset]:
    """Labeled set with exactly ``ratio``:1 class counts and an unlabeled pool drawn from the same mixture.

    The unlabeled set keeps its hidden labels out of the dataset; use
    :func:`hidden_labels` to recover them for diagnostics.
    """
    n_fraud = round(spec.n_labeled / (1.0 + spec.ratio))
    rng = make_rng(child_seed(spec.seed, 0))
    X_l, y_l = _draw(rng, spec.n_labeled - n_fraud, n_fraud, spec.fraud_mean)
    X_u, _ = _pool(spec)
    labeled = Dataset.from_arrays(X_l, y_l, source="synthetic:labeled")
    n_u = X_u.shape[0]
    offset = spec.n_labeled
    unlabeled = Dataset.from_arrays(
        X_u,
        None,
        [f"b{offset + i}" for i in range(n_u)],
        [f"a{offset + i}" for i in range(n_u)],
        source="synthetic:unlabeled",
    )
    return labeled, unlabeled


def _pool(spec: MixtureSpec) -> tuple[np.ndarray, np.ndarray]:
    rng = make_rng(child_seed(spec.seed, 1))
    n_fraud = int(rng.binomial(spec.n_unlabeled, spec.fraud_prior))
    return _draw(rng, spec.n_unlabeled - n_fraud, n_fraud, spec.fraud_mean)


def hidden_labels(spec: MixtureSpec = MixtureSpec()) -> np.ndarray:
    return _pool(spec)[1]
