from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import Label

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ClassDistribution:
    """P(class | x) over {Normal, Fraud}."""

    p_normal: float
    p_fraud: float

    def __post_init__(self):
        for p in (self.p_normal, self.p_fraud):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probabilities must lie in [0, 1], got {p}")
        if abs(self.p_normal + self.p_fraud - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"probabilities must sum to 1, got {self.p_normal} + {self.p_fraud}")

    @classmethod
    def from_fraud(cls, p_fraud: float) -> "ClassDistribution":
        p = float(p_fraud)
        return cls(1.0 - p, p)

    @property
    def label(self) -> Label:
        # ties go to fraud, the costlier miss
        return Label.FRAUD if self.p_fraud >= self.p_normal else Label.NORMAL


def hard_labels(p_fraud: np.ndarray) -> np.ndarray:
    """Argmax labels for an array of fraud probabilities; ties go to fraud."""
    p = np.asarray(p_fraud, dtype=np.float64)
    return (p >= 1.0 - p).astype(np.int8)


class ProbabilisticClassifier:
    """Shared prediction surface. Subclasses implement :meth:`predict_proba`."""

    def predict_proba(self, X) -> np.ndarray:
        """Return P(fraud | x) for every row of ``X``."""
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return hard_labels(self.predict_proba(X))

    def distribution(self, x) -> ClassDistribution:
        row = np.asarray(getattr(x, "features", x), dtype=np.float64).reshape(1, -1)
        return ClassDistribution.from_fraud(float(self.predict_proba(row)[0]))


def as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return X.reshape(1, -1) if X.ndim == 1 else X
