"""Result tables (metrics as rows, pipelines as columns) and curve series."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .harness import AGGREGATION_NOTE, RunResults, SweepPoint
from .stats import TTestResult, paired_ttest

# (row label, metric key) in table order
TABLE_ROWS = (
    ("Kappa", "kappa"),
    ("FNR", "fnr"),
    ("FPR", "fpr"),
    ("Recall", "recall"),
    ("AUC", "auc"),
    ("Cost", "total_cost"),
)
CURVE_COLUMNS = ("penalty", "pipeline", "total_cost", "recall", "fnr", "fpr", "kappa", "auc")
MARKERS = {"significantly_worse": "*", "significantly_better": "**", "no_difference": ""}


def marker(verdict: str) -> str:
    return MARKERS[verdict]


def headline(results: RunResults, metric: str) -> Optional[float]:
    """Number shown in a table cell: fold mean, or the per-run summed cost."""
    return results.mean_total_cost if metric == "total_cost" else results.mean(metric)


def format_value(value: Optional[float], digits: int = 2) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


@dataclass(frozen=True)
class ResultsTable:
    """Headline numbers plus each column's verdict against the baseline column."""

    columns: tuple
    values: dict
    verdicts: dict
    baseline: str
    alpha: float
    penalty: Optional[float] = None

    def cell(self, column: str, metric: str, digits: int = 2) -> str:
        verdict = self.verdicts.get(column, {}).get(metric)
        suffix = marker(verdict.verdict) if verdict is not None else ""
        return format_value(self.values[column][metric], digits) + suffix

    def rows(self, digits: int = 2) -> list[list[str]]:
        out = [["metric", *self.columns]]
        for label, key in TABLE_ROWS:
            out.append([label, *(self.cell(c, key, digits) for c in self.columns)])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(self.rows())
        return buf.getvalue()

    def to_text(self) -> str:
        rows = self.rows()
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "penalty": self.penalty,
            "baseline": self.baseline,
            "alpha": self.alpha,
            "aggregation": AGGREGATION_NOTE,
            "markers": {"*": "significantly worse than baseline", "**": "significantly better than baseline"},
            "columns": list(self.columns),
            "values": self.values,
            "tests": {c: {m: t.to_dict() for m, t in v.items()} for c, v in self.verdicts.items()},
        }


def results_table(
    results: Sequence[RunResults],
    baseline: int = 0,
    alpha: float = 0.05,
    corrected: bool = True,
    penalty: Optional[float] = None,
) -> ResultsTable:
    """Table over ``results``; every non-baseline column is t-tested against the baseline."""
    if not results:
        raise ValueError("need at least one result set")
    names = [r.name for r in results]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate pipeline names: {names}")
    base = results[baseline]
    values = {r.name: {key: headline(r, key) for _, key in TABLE_ROWS} for r in results}
    verdicts: dict[str, dict[str, TTestResult]] = {}
    for i, r in enumerate(results):
        if i == baseline:
            continue
        verdicts[r.name] = {}
        for _, key in TABLE_ROWS:
            try:
                verdicts[r.name][key] = paired_ttest(r, base, key, alpha, corrected)
            except ValueError:
                if r.plan_digest != base.plan_digest:
                    raise
                # too few defined folds to pair; leave the cell unmarked
    return ResultsTable(tuple(names), values, verdicts, base.name, alpha, penalty)


def compare_table(a: RunResults, b: RunResults, alpha: float = 0.05, corrected: bool = True) -> ResultsTable:
    """``a`` (marked) against ``b`` (baseline)."""
    if a.name == b.name:
        a = _renamed(a, f"{a.name} (A)")
        b = _renamed(b, f"{b.name} (B)")
    table = results_table([b, a], baseline=0, alpha=alpha, corrected=corrected)
    return ResultsTable((a.name, b.name), table.values, table.verdicts, b.name, alpha)


def _renamed(r: RunResults, name: str) -> RunResults:
    return dataclasses.replace(r, name=name)


def curve_rows(series: dict[str, Sequence[SweepPoint]]) -> list[dict]:
    """Long-format learning-curve rows, ordered by pipeline then penalty."""
    rows = []
    for name, points in series.items():
        for pt in points:
            agg = pt.summary()
            rows.append(
                {
                    "penalty": pt.penalty,
                    "pipeline": name,
                    "total_cost": pt.total_cost,
                    **{m: agg[m] for m in ("recall", "fnr", "fpr", "kappa", "auc")},
                }
            )
    return rows


def curve_csv(series: dict[str, Sequence[SweepPoint]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for row in curve_rows(series):
        writer.writerow([_csv_value(row[c]) for c in CURVE_COLUMNS])
    return buf.getvalue()


def _csv_value(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def results_csv(results: RunResults) -> str:
    """One row per (run, fold) cell."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["run", "fold", "n_train", "n_test", "tp", "tn", "fp", "fn", "recall", "fnr", "fpr", "kappa", "auc", "total_cost"]
    writer.writerow(header)
    for f in results.folds:
        r = f.report
        c = r.confusion
        vals = [r.recall, r.fnr, r.fpr, r.kappa, r.auc, r.total_cost]
        writer.writerow([f.run, f.fold, f.n_train, f.n_test, c.tp, c.tn, c.fp, c.fn, *map(_csv_value, vals)])
    return buf.getvalue()
