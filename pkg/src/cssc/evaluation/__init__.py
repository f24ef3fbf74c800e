"""Metrics, cross-validation harness, significance tests and report tables."""

from .harness import (
    AGGREGATION_NOTE,
    FoldResult,
    GridSearchResult,
    GridTrial,
    RunResults,
    SweepPoint,
    cross_validate,
    expand_grid,
    grid_search,
    penalty_sweep,
)
from .metrics import (
    HIGHER_IS_BETTER,
    METRIC_NAMES,
    ConfusionMatrix,
    MetricsReport,
    auc,
    confusion,
    evaluate,
    kappa,
    kappa_parts,
    metrics,
)
from .report import ResultsTable, compare_table, curve_csv, marker, results_table
from .stats import TTestResult, paired_ttest, ttest_from_differences

__all__ = [
    "AGGREGATION_NOTE",
    "ConfusionMatrix",
    "FoldResult",
    "GridSearchResult",
    "GridTrial",
    "HIGHER_IS_BETTER",
    "METRIC_NAMES",
    "MetricsReport",
    "ResultsTable",
    "RunResults",
    "SweepPoint",
    "TTestResult",
    "auc",
    "compare_table",
    "confusion",
    "cross_validate",
    "curve_csv",
    "evaluate",
    "expand_grid",
    "grid_search",
    "kappa",
    "kappa_parts",
    "marker",
    "metrics",
    "paired_ttest",
    "penalty_sweep",
    "results_table",
    "ttest_from_differences",
]
