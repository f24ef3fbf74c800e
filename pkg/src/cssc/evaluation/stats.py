"""Paired significance testing over cross-validation folds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as student_t

from .harness import RunResults
from .metrics import HIGHER_IS_BETTER

VERDICTS = ("significantly_worse", "no_difference", "significantly_better")
# reported statistic when the paired differences have zero variance
STAT_CAP = 1e6


@dataclass(frozen=True)
class TTestResult:
    """Outcome for ``a`` relative to ``b``; "better" follows the metric's direction."""

    statistic: float
    p_value: float
    verdict: str
    alpha: float
    metric: str = ""
    n: int = 0
    mean_difference: float = 0.0
    corrected: bool = True

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "verdict": self.verdict,
            "alpha": self.alpha,
            "n": self.n,
            "mean_difference": self.mean_difference,
            "corrected": self.corrected,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TTestResult":
        return cls(**data)


def ttest_from_differences(
    diffs,
    test_train_ratio: float,
    alpha: float = 0.05,
    higher_is_better: bool = True,
    corrected: bool = True,
    metric: str = "",
) -> TTestResult:
    """Resampled paired t-test on per-fold differences ``a - b``.

    The corrected form multiplies the sample variance by
    ``1/n + n_test/n_train`` (Nadeau and Bengio) instead of ``1/n``.
    """
    d = np.asarray(diffs, dtype=np.float64)
    n = d.size
    if n < 2:
        raise ValueError(f"need at least 2 paired samples, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    mean = math.fsum(d) / n
    var = float(np.sum((d - mean) ** 2)) / (n - 1)
    scale = 1.0 / n + (test_train_ratio if corrected else 0.0)
    if var == 0.0:
        if mean == 0.0:
            stat, p = 0.0, 1.0
        else:
            stat, p = math.copysign(STAT_CAP, mean), 0.0
    else:
        stat = mean / math.sqrt(scale * var)
        p = float(2.0 * student_t.sf(abs(stat), n - 1))
        stat = max(-STAT_CAP, min(STAT_CAP, stat))
    verdict = "no_difference"
    if p < alpha and mean != 0.0:
        a_better = (mean > 0) == higher_is_better
        verdict = "significantly_better" if a_better else "significantly_worse"
    return TTestResult(float(stat), p, verdict, alpha, metric, n, mean, corrected)


def paired_ttest(
    a: RunResults,
    b: RunResults,
    metric: str,
    alpha: float = 0.05,
    corrected: bool = True,
) -> TTestResult:
    """Compare ``a`` against ``b`` on one metric over their shared fold plan.

    Folds where either side's metric is undefined are left out of the pairing.
    """
    if metric not in HIGHER_IS_BETTER:
        raise KeyError(f"unknown metric {metric!r}")
    if a.plan_digest != b.plan_digest:
        raise ValueError("results come from different fold plans")
    pairs = [(x, y) for x, y in zip(a.values(metric), b.values(metric)) if x is not None and y is not None]
    diffs = [x - y for x, y in pairs]
    return ttest_from_differences(diffs, a.test_train_ratio, alpha, HIGHER_IS_BETTER[metric], corrected, metric)
