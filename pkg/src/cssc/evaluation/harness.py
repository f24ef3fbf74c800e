"""Repeated cross-validation, penalty sweeps and grid search."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from ..cost import CostMatrix
from ..dataset import Dataset, FoldPlan
from ..pipeline import PipelineSpec
from .metrics import METRIC_NAMES, MetricsReport, evaluate

AGGREGATION_NOTE = (
    "per-fold metrics averaged over all folds and runs; total_cost is the sum of fold costs "
    "within one cross-validation pass, averaged over runs"
)


@dataclass(frozen=True)
class FoldResult:
    run: int
    fold: int
    n_train: int
    n_test: int
    report: MetricsReport

    def to_dict(self) -> dict:
        return {
            "run": self.run,
            "fold": self.fold,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "report": self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FoldResult":
        return cls(data["run"], data["fold"], data["n_train"], data["n_test"], MetricsReport.from_dict(data["report"]))


@dataclass(frozen=True)
class RunResults:
    """All (run, fold) reports of one cross-validated pipeline, in (run, fold) order."""

    name: str
    pipeline: dict
    k: int
    runs: int
    seed: int
    plan_digest: str
    folds: tuple
    cost: CostMatrix = field(default_factory=CostMatrix)

    def __post_init__(self):
        if len(self.folds) != self.k * self.runs:
            raise ValueError(f"expected {self.k * self.runs} fold results, got {len(self.folds)}")

    def values(self, metric: str) -> list[Optional[float]]:
        return [f.report.value(metric) for f in self.folds]

    def mean(self, metric: str) -> Optional[float]:
        vals = [v for v in self.values(metric) if v is not None]
        return math.fsum(vals) / len(vals) if vals else None

    def undefined(self, metric: str) -> int:
        return sum(v is None for v in self.values(metric))

    def run_costs(self) -> list[float]:
        totals = [0.0] * self.runs
        for f in self.folds:
            totals[f.run] += f.report.total_cost
        return totals

    @property
    def mean_total_cost(self) -> float:
        costs = self.run_costs()
        return math.fsum(costs) / len(costs)

    @property
    def test_train_ratio(self) -> float:
        return float(np.mean([f.n_test / f.n_train for f in self.folds]))

    def aggregates(self) -> dict[str, Optional[float]]:
        out = {m: self.mean(m) for m in METRIC_NAMES if m != "total_cost"}
        out["total_cost"] = self.mean_total_cost
        out["fold_mean_total_cost"] = self.mean("total_cost")
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pipeline": self.pipeline,
            "cost": self.cost.to_dict(),
            "plan": {"k": self.k, "runs": self.runs, "seed": self.seed, "digest": self.plan_digest},
            "aggregation": AGGREGATION_NOTE,
            "aggregates": self.aggregates(),
            "undefined": {m: self.undefined(m) for m in METRIC_NAMES},
            "run_costs": self.run_costs(),
            "folds": [f.to_dict() for f in self.folds],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunResults":
        plan = data["plan"]
        return cls(
            name=data["name"],
            pipeline=data["pipeline"],
            k=plan["k"],
            runs=plan["runs"],
            seed=plan["seed"],
            plan_digest=plan["digest"],
            folds=tuple(FoldResult.from_dict(f) for f in data["folds"]),
            cost=CostMatrix(**data["cost"]),
        )


def _evaluate_cell(
    pipeline: PipelineSpec,
    labeled: Dataset,
    X_unlabeled: np.ndarray,
    plan: FoldPlan,
    run: int,
    fold: int,
    costs: Sequence[CostMatrix],
) -> list[FoldResult]:
    """Train on one fold's complement and score the held-out fold under each cost matrix."""
    train, test = plan.train_indices(run, fold), plan.test_indices(run, fold)
    X_tr, y_tr = labeled.X[train], labeled.y[train]
    X_te, y_te = labeled.X[test], labeled.y[test]
    X_u = np.vstack([X_unlabeled, X_te]) if pipeline.is_transductive else X_unlabeled
    seed = (pipeline.seed, run, fold)
    out = []
    if pipeline.metacost is None:
        model = pipeline.fit(X_tr, y_tr, X_u, seed)
        scores, preds = model.predict_proba(X_te), model.predict(X_te)
        for cost in costs:
            out.append(FoldResult(run, fold, len(train), len(test), evaluate(preds, y_te, scores, cost)))
        return out
    # bag estimates do not depend on costs; final models are shared between
    # penalties that produce the same relabeling
    bagged = pipeline.bagged(X_tr, y_tr, X_u, seed)
    finals: dict = {}
    for cost in costs:
        model = pipeline.with_cost(cost).fit(X_tr, y_tr, X_u, seed, bagged=bagged, cache=finals)
        scores, preds = model.predict_proba(X_te), model.predict(X_te)
        out.append(FoldResult(run, fold, len(train), len(test), evaluate(preds, y_te, scores, cost)))
    return out


def _cell_job(args):
    return _evaluate_cell(*args)


def _run_cells(pipeline, labeled, unlabeled, plan, costs, n_jobs) -> list[list[FoldResult]]:
    if plan.n_instances != len(labeled):
        raise ValueError(f"fold plan covers {plan.n_instances} instances but the labeled set has {len(labeled)}")
    if np.any((plan.assignments >= 0) != labeled.labeled_mask[None, :]):
        raise ValueError("fold plan does not match the labeled rows of the dataset")
    X_u = unlabeled.X if unlabeled is not None else np.empty((0, labeled.X.shape[1]))
    jobs = [(pipeline, labeled, X_u, plan, run, fold, tuple(costs)) for run, fold in plan.cells()]
    if n_jobs == 1 or len(jobs) == 1:
        return [_cell_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        # map preserves submission order, so aggregation stays canonical
        return list(pool.map(_cell_job, jobs))


def _collect(pipeline, plan, cell_results, index, cost) -> RunResults:
    return RunResults(
        name=pipeline.name,
        pipeline=pipeline.with_cost(cost).to_dict(),
        k=plan.k,
        runs=plan.runs,
        seed=plan.seed,
        plan_digest=plan.digest(),
        folds=tuple(cell[index] for cell in cell_results),
        cost=cost,
    )


def cross_validate(
    pipeline: PipelineSpec,
    labeled: Dataset,
    unlabeled: Optional[Dataset],
    plan: FoldPlan,
    n_jobs: int = 1,
) -> RunResults:
    """Evaluate ``pipeline`` on every (run, fold) cell of ``plan``.

    Each cell trains on the other folds' labeled rows plus the whole unlabeled
    pool and is seeded from (pipeline seed, run, fold), so results do not
    depend on ``n_jobs``.
    """
    cells = _run_cells(pipeline, labeled, unlabeled, plan, [pipeline.cost], n_jobs)
    return _collect(pipeline, plan, cells, 0, pipeline.cost)


@dataclass(frozen=True)
class SweepPoint:
    penalty: float
    total_cost: float
    results: RunResults

    def summary(self) -> dict:
        return self.results.aggregates()


def penalty_sweep(
    pipeline: PipelineSpec,
    labeled: Dataset,
    unlabeled: Optional[Dataset],
    plan: FoldPlan,
    penalties: Sequence[float],
    n_jobs: int = 1,
) -> list[SweepPoint]:
    """One cross-validation per false-negative cost, in the order given.

    Equivalent to calling :func:`cross_validate` with each cost matrix; the
    bagging stage runs once per cell and is shared by all penalties.
    """
    if not penalties:
        raise ValueError("penalties must be non-empty")
    costs = [pipeline.cost.with_fn(p) for p in penalties]
    cells = _run_cells(pipeline, labeled, unlabeled, plan, costs, n_jobs)
    points = []
    for i, (penalty, cost) in enumerate(zip(penalties, costs)):
        results = _collect(pipeline, plan, cells, i, cost)
        points.append(SweepPoint(float(penalty), results.mean_total_cost, results))
    return points


@dataclass(frozen=True)
class GridTrial:
    params: dict
    mean_fnr: Optional[float]
    mean_total_cost: float
    mean_fpr: Optional[float]
    results: RunResults

    def key(self):
        inf = float("inf")
        return (
            inf if self.mean_fnr is None else self.mean_fnr,
            self.mean_total_cost,
            inf if self.mean_fpr is None else self.mean_fpr,
        )


@dataclass(frozen=True)
class GridSearchResult:
    best_params: dict
    best: GridTrial
    trials: tuple

    def to_dict(self) -> dict:
        return {
            "best_params": self.best_params,
            "best": {
                "mean_fnr": self.best.mean_fnr,
                "mean_total_cost": self.best.mean_total_cost,
                "mean_fpr": self.best.mean_fpr,
            },
            "selection": "lowest mean FNR, then lowest total cost, then lowest FPR",
            "trials": [
                {
                    "params": t.params,
                    "mean_fnr": t.mean_fnr,
                    "mean_total_cost": t.mean_total_cost,
                    "mean_fpr": t.mean_fpr,
                }
                for t in self.trials
            ],
        }


def expand_grid(param_ranges: dict[str, Sequence[Any]]) -> list[dict]:
    if not param_ranges or any(len(v) == 0 for v in param_ranges.values()):
        raise ValueError("grid must declare at least one value for every parameter")
    keys = list(param_ranges)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(param_ranges[k] for k in keys))]


def grid_search(
    template: PipelineSpec,
    param_ranges: dict[str, Sequence[Any]],
    labeled: Dataset,
    unlabeled: Optional[Dataset],
    plan: FoldPlan,
    n_jobs: int = 1,
) -> GridSearchResult:
    """Exhaustive search; the first grid point wins remaining ties."""
    trials = []
    for params in expand_grid(param_ranges):
        spec = template.with_params(params)
        results = cross_validate(spec, labeled, unlabeled, plan, n_jobs)
        trials.append(
            GridTrial(params, results.mean("fnr"), results.mean_total_cost, results.mean("fpr"), results)
        )
    best = min(trials, key=GridTrial.key)
    return GridSearchResult(best.params, best, tuple(trials))
