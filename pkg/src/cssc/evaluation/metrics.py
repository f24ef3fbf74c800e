"""Confusion accounting and the imbalance-aware metrics.

Fraud is the positive class. A ratio whose denominator is zero is reported as
``None`` rather than 0 or NaN; aggregation skips such entries and counts them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from ..cost import CostMatrix, total_cost
from ..dataset import Label

METRIC_NAMES = ("recall", "fnr", "fpr", "kappa", "auc", "total_cost")
# metrics where a larger value is the better one
HIGHER_IS_BETTER = {"recall": True, "fnr": False, "fpr": False, "kappa": True, "auc": True, "total_cost": False}


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


def confusion(predictions, truth) -> ConfusionMatrix:
    pred = np.asarray(predictions).reshape(-1)
    true = np.asarray(truth).reshape(-1)
    if pred.shape != true.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions vs {true.size} truth labels")
    pf, tf = pred == Label.FRAUD, true == Label.FRAUD
    return ConfusionMatrix(
        tp=int(np.sum(pf & tf)),
        tn=int(np.sum(~pf & ~tf)),
        fp=int(np.sum(pf & ~tf)),
        fn=int(np.sum(~pf & tf)),
    )


def _ratio(num: int, den: int) -> Optional[float]:
    return None if den == 0 else num / den


def metrics(conf: ConfusionMatrix) -> dict[str, Optional[float]]:
    return {
        "recall": _ratio(conf.tp, conf.tp + conf.fn),
        "fnr": _ratio(conf.fn, conf.fn + conf.tp),
        "fpr": _ratio(conf.fp, conf.fp + conf.tn),
    }


def kappa_parts(conf: ConfusionMatrix) -> tuple[Optional[float], Optional[float]]:
    n = conf.total
    if n == 0:
        return None, None
    p_observed = (conf.tp + conf.tn) / n
    p_chance = ((conf.tp + conf.fn) * (conf.tp + conf.fp) + (conf.tn + conf.fp) * (conf.tn + conf.fn)) / (n * n)
    return p_observed, p_chance


def kappa(conf: ConfusionMatrix) -> Optional[float]:
    """Chance-corrected agreement; ``None`` when chance agreement is total."""
    p_observed, p_chance = kappa_parts(conf)
    if p_observed is None or p_chance == 1.0:
        return None
    return (p_observed - p_chance) / (1.0 - p_chance)


def auc(scores, truth) -> float:
    """P(random fraud outscores random normal), ties counted one half.

    Computed from average ranks (Mann-Whitney U).
    """
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    t = np.asarray(truth).reshape(-1)
    if s.shape != t.shape:
        raise ValueError("scores and truth must have equal lengths")
    pos = t == Label.FRAUD
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes in the truth labels")
    ranks = rankdata(s)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class MetricsReport:
    confusion: ConfusionMatrix
    recall: Optional[float]
    fnr: Optional[float]
    fpr: Optional[float]
    kappa: Optional[float]
    auc: Optional[float]
    total_cost: float
    p_observed: Optional[float]
    p_chance: Optional[float]
    cost: CostMatrix = field(default_factory=CostMatrix)

    def value(self, name: str) -> Optional[float]:
        if name not in METRIC_NAMES:
            raise KeyError(f"unknown metric {name!r}")
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion.to_dict(),
            "recall": self.recall,
            "fnr": self.fnr,
            "fpr": self.fpr,
            "kappa": self.kappa,
            "auc": self.auc,
            "total_cost": self.total_cost,
            "p_observed": self.p_observed,
            "p_chance": self.p_chance,
            "cost": self.cost.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsReport":
        return cls(
            confusion=ConfusionMatrix(**data["confusion"]),
            recall=data["recall"],
            fnr=data["fnr"],
            fpr=data["fpr"],
            kappa=data["kappa"],
            auc=data["auc"],
            total_cost=data["total_cost"],
            p_observed=data["p_observed"],
            p_chance=data["p_chance"],
            cost=CostMatrix(**data["cost"]),
        )


def evaluate(predictions, truth, scores=None, cost: CostMatrix = CostMatrix()) -> MetricsReport:
    conf = confusion(predictions, truth)
    rates = metrics(conf)
    p_observed, p_chance = kappa_parts(conf)
    area = None
    if scores is not None:
        t = np.asarray(truth)
        if np.any(t == Label.FRAUD) and np.any(t != Label.FRAUD):
            area = auc(scores, t)
    return MetricsReport(
        confusion=conf,
        recall=rates["recall"],
        fnr=rates["fnr"],
        fpr=rates["fpr"],
        kappa=kappa(conf),
        auc=area,
        total_cost=float(total_cost(conf, cost)),
        p_observed=p_observed,
        p_chance=p_chance,
        cost=cost,
    )
