import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cssc.dataset import Dataset, Label

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance outcomes, filled by tests/test_acceptance.py and printed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def blobs(n_normal, n_fraud, seed=0, shift=2.0):
    """Two Gaussian clouds in 9-D; fraud is shifted along every axis."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_normal + n_fraud, 9))
    X[n_normal:] += shift
    y = np.r_[np.zeros(n_normal), np.ones(n_fraud)].astype(np.int8)
    return X, y


@pytest.fixture
def small_labeled():
    X, y = blobs(50, 10, seed=1)
    return Dataset.from_arrays(X, y)


@pytest.fixture
def small_pool():
    X, _ = blobs(100, 20, seed=2)
    return Dataset.from_arrays(X, None, [f"u{i}" for i in range(len(X))], [f"v{i}" for i in range(len(X))])


def unlabeled_codes(n):
    return np.full(n, Label.UNLABELED, dtype=np.int8)
