"""Command-line entry point.

Commands: ``run``, ``tune``, ``compare``, ``inspect-data``, plus ``fit`` /
``predict`` for saved models and ``make-synthetic`` for test fixtures.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, ExperimentConfig, load_config, parse_list
from .dataset import (
    FEATURE_NAMES,
    Dataset,
    DatasetError,
    Label,
    class_ratio,
    concat,
    load_csv,
    minmax_scale,
    save_csv,
    split_labeled_unlabeled,
    stratified_kfold,
)
from .evaluation import AGGREGATION_NOTE, RunResults, compare_table, grid_search, penalty_sweep, results_table
from .evaluation.report import curve_csv, dumps, results_csv, write_text
from .serialization import model_from_dict, model_to_dict
from .synthetic import SHIFT_PROFILES, MixtureSpec, make_mixture

REPORT_NOTES = {
    "aggregation": AGGREGATION_NOTE,
    "metacost_scope": "MetaCost bags and retrains the whole semi-supervised pipeline, not its base learners",
    "auc_scores": "AUC uses the final (post-relabeling) model's fraud probabilities on the held-out fold",
}

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad input that is the caller's to fix (exit code 2)."""


def penalty_tag(p: float) -> str:
    return str(int(p)) if float(p).is_integer() else repr(float(p)).replace(".", "_")


def load_data(cfg: ExperimentConfig) -> tuple[Dataset, Dataset]:
    """Labeled rows and unlabeled pool, optionally min-max scaled together."""
    if not cfg.data:
        raise UsageError("no data file given (use --data or [experiment] data)")
    for path in filter(None, (cfg.data, cfg.unlabeled)):
        if not Path(path).is_file():
            raise UsageError(f"data file not found: {path}")
    labeled, pool = split_labeled_unlabeled(load_csv(cfg.data, cfg.schema))
    if cfg.unlabeled:
        extra = load_csv(cfg.unlabeled, cfg.schema)
        extra = extra.with_labels([Label.UNLABELED] * len(extra))
        pool = concat([pool, extra], source=f"{cfg.data}+{cfg.unlabeled}")
    if cfg.scale:
        labeled, pool = minmax_scale(labeled, pool)
    return labeled, pool


def _data_echo(labeled: Dataset, pool: Dataset) -> dict:
    return {
        "labeled": {"source": labeled.source, "rows": len(labeled), "normal": labeled.n_normal, "fraud": labeled.n_fraud},
        "unlabeled": {"source": pool.source, "rows": len(pool)},
    }


def _config_from_args(args) -> ExperimentConfig:
    overrides = {
        "data": args.data,
        "unlabeled": args.unlabeled,
        "k": args.k,
        "runs": args.runs,
        "seed": args.seed,
        "penalties": args.cost_fn,
        "cost_fp": args.cost_fp,
        "pipelines": args.pipeline,
        "out": args.out,
        "jobs": args.jobs,
        "alpha": args.alpha,
    }
    if args.lenient:
        overrides["schema"] = "lenient"
    if args.scale:
        overrides["scale"] = True
    if args.naive_ttest:
        overrides["corrected"] = False
    if args.min_risk_predict:
        overrides["min_risk_predict"] = True
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    return load_config(args.config, overrides)


def cmd_run(cfg: ExperimentConfig, log=print) -> dict:
    """Penalty sweep for every configured pipeline; writes tables, curve and report."""
    specs = cfg.resolved_pipelines()
    labeled, pool = load_data(cfg)
    plan = stratified_kfold(labeled, cfg.k, cfg.runs, cfg.seed)
    out = Path(cfg.out)
    series = {}
    for spec in specs:
        log(f"[{spec.name}] sweeping penalties {list(cfg.penalties)} over {cfg.k}x{cfg.runs} folds")
        series[spec.name] = penalty_sweep(spec, labeled, pool, plan, cfg.penalties, cfg.jobs)
    tables = []
    for i, penalty in enumerate(cfg.penalties):
        results = [series[s.name][i].results for s in specs]
        table = results_table(results, alpha=cfg.alpha, corrected=cfg.corrected, penalty=penalty)
        tag = penalty_tag(penalty)
        if "csv" in cfg.formats:
            write_text(out / f"table_cfn{tag}.csv", table.to_csv())
        if "json" in cfg.formats:
            write_text(out / f"table_cfn{tag}.json", dumps({"config": cfg.to_dict(runtime=False), "table": table.to_dict()}))
        for r in results:
            stem = out / "results" / f"{r.name}_cfn{tag}"
            if "json" in cfg.formats:
                write_text(stem.with_suffix(".json"), dumps(r.to_dict()))
            if "csv" in cfg.formats:
                write_text(stem.with_suffix(".csv"), results_csv(r))
        log(f"\nc_fn = {penalty:g}\n" + table.to_text())
        tables.append(table.to_dict())
    write_text(out / "curve.csv", curve_csv(series))
    report = {
        "config": cfg.to_dict(runtime=False),
        "data": _data_echo(labeled, pool),
        "plan": {"k": plan.k, "runs": plan.runs, "seed": plan.seed, "digest": plan.digest()},
        "pipelines": {s.name: s.to_dict() for s in specs},
        "notes": REPORT_NOTES,
        "tables": tables,
    }
    write_text(out / "report.json", dumps(report))
    return report


def cmd_tune(cfg: ExperimentConfig, log=print) -> dict:
    """Grid search for one pipeline at the first configured penalty; writes best.json."""
    if not cfg.tune_grid:
        raise ConfigError("empty grid: declare parameter ranges in a [tune] section or with --grid")
    name = cfg.tune_pipeline or cfg.pipelines[0]
    spec = cfg.pipeline(name)
    labeled, pool = load_data(cfg)
    plan = stratified_kfold(labeled, cfg.k, cfg.runs, cfg.seed)
    try:
        result = grid_search(spec, cfg.tune_grid, labeled, pool, plan, cfg.jobs)
    except KeyError as exc:
        raise ConfigError(f"grid: {exc.args[0]}") from exc
    best = {
        "config": cfg.to_dict(runtime=False),
        "pipeline": name,
        "plan": {"k": plan.k, "runs": plan.runs, "seed": plan.seed, "digest": plan.digest()},
        **result.to_dict(),
        "best_pipeline": spec.with_params(result.best_params).to_dict(),
    }
    write_text(Path(cfg.out) / "best.json", dumps(best))
    fnr = result.best.mean_fnr
    log(f"best {result.best_params}: mean FNR {'n/a' if fnr is None else f'{fnr:.4f}'}, cost {result.best.mean_total_cost:g}")
    return best


def _read_results(path: str) -> RunResults:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"results file not found: {p}")
    try:
        return RunResults.from_dict(json.loads(p.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{p}: not a results file ({exc})") from exc


def cmd_compare(path_a: str, path_b: str, alpha: float = 0.05, corrected: bool = True, out: Optional[str] = None, log=print):
    """Significance markers for A against B (B is the baseline)."""
    a, b = _read_results(path_a), _read_results(path_b)
    if a.plan_digest != b.plan_digest:
        raise UsageError("results were produced on different fold plans")
    table = compare_table(a, b, alpha, corrected)
    log(table.to_text())
    for metric, test in table.verdicts[table.columns[0]].items():
        log(f"{metric:>10}: t={test.statistic:.4g} p={test.p_value:.4g} {test.verdict}")
    if out:
        write_text(Path(out), dumps(table.to_dict()))
    return table


def cmd_inspect(path: str, schema: str = "strict", as_json: bool = False, log=print) -> dict:
    if not Path(path).is_file():
        raise UsageError(f"data file not found: {path}")
    ds = load_csv(path, schema)
    labeled, pool = split_labeled_unlabeled(ds)
    summary = {
        "source": str(path),
        "rows": len(ds),
        "labeled": len(labeled),
        "unlabeled": len(pool),
        "normal": ds.n_normal,
        "fraud": ds.n_fraud,
        "normal_to_fraud": class_ratio(ds) if ds.n_fraud else None,
        "features": {
            name: {"min": float(ds.X[:, j].min()), "max": float(ds.X[:, j].max())} if len(ds) else None
            for j, name in enumerate(FEATURE_NAMES)
        },
    }
    if as_json:
        log(dumps(summary).rstrip())
    else:
        ratio = summary["normal_to_fraud"]
        log(f"{path}: {len(ds)} rows, {len(labeled)} labeled ({ds.n_normal} normal, {ds.n_fraud} fraud), {len(pool)} unlabeled")
        log(f"normal:fraud = {'n/a' if ratio is None else f'{ratio:.2f}'}:1")
        for name, rng in summary["features"].items():
            if rng is not None:
                log(f"  {name:<16} [{rng['min']:.4g}, {rng['max']:.4g}]")
    return summary


def cmd_fit(cfg: ExperimentConfig, model_out: str, log=print) -> dict:
    """Train the first configured pipeline on all labeled rows at the first penalty."""
    spec = cfg.pipeline(cfg.pipelines[0])
    labeled, pool = load_data(cfg)
    model = spec.fit(labeled.X, labeled.y, pool.X, (spec.seed,))
    doc = {"config": cfg.to_dict(runtime=False), "pipeline": spec.to_dict(), "model": model_to_dict(model)}
    write_text(Path(model_out), dumps(doc))
    log(f"wrote {model_out}: {spec.name} trained on {len(labeled)} labeled + {len(pool)} unlabeled rows")
    return doc


def cmd_predict(model_path: str, data: str, out: Optional[str], schema: str = "strict", log=print) -> list:
    for path in (model_path, data):
        if not Path(path).is_file():
            raise UsageError(f"file not found: {path}")
    try:
        model = model_from_dict(json.loads(Path(model_path).read_text(encoding="utf-8"))["model"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{model_path}: not a model file ({exc})") from exc
    ds = load_csv(data, schema)
    p = model.predict_proba(ds.X)
    labels = model.predict(ds.X)
    rows = [
        (b, a, repr(float(pf)), Label(int(c)).to_text())
        for b, a, pf, c in zip(ds.bidder_ids, ds.auction_ids, p, labels)
    ]
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bidder_id", "auction_id", "p_fraud", "prediction"])
            writer.writerows(rows)
        log(f"wrote {out}: {len(rows)} predictions")
    else:
        for row in rows:
            log(",".join(row))
    return rows


def cmd_make_synthetic(spec: MixtureSpec, out: str, log=print) -> Path:
    labeled, pool = make_mixture(spec)
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_csv(concat([labeled, pool], source=str(path)), path)
    log(f"wrote {path}: {len(labeled)} labeled ({labeled.n_fraud} fraud), {len(pool)} unlabeled; Bayes error {spec.bayes_error:.4f}")
    return path


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI experiment file")
    p.add_argument("--data", help="CSV with labeled (and optionally unlabeled) rows")
    p.add_argument("--unlabeled", help="CSV of extra unlabeled rows; any labels are ignored")
    p.add_argument("--k", type=int, help="folds")
    p.add_argument("--runs", type=int, help="cross-validation repetitions")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--cost-fn", help="false-negative penalties, comma separated (e.g. 2,3,4,5)")
    p.add_argument("--cost-fp", type=float, help="false-positive penalty")
    p.add_argument("--pipeline", help="pipelines, comma separated")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="parallel worker processes for fold cells")
    p.add_argument("--alpha", type=float, help="significance level")
    p.add_argument("--lenient", action="store_true", help="map CSV columns by name")
    p.add_argument("--scale", action="store_true", help="min-max scale features over labeled and unlabeled rows")
    p.add_argument("--naive-ttest", action="store_true", help="uncorrected paired t-test")
    p.add_argument("--min-risk-predict", action="store_true", help="apply the minimum-risk rule at prediction time")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="any config key or dotted pipeline parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cssc", description="Cost-sensitive semi-supervised fraud classification.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="penalty sweep over pipelines; writes tables, curve and report")
    _add_experiment_args(run)

    tune = sub.add_parser("tune", help="grid search; writes best.json")
    _add_experiment_args(tune)
    tune.add_argument("--grid", action="append", metavar="KEY=V1,V2", help="parameter range, e.g. yatsi.k=1,3,5")
    tune.add_argument("--tune-pipeline", help="pipeline to tune (default: first configured)")

    cmp_ = sub.add_parser("compare", help="significance markers for results A against baseline B")
    cmp_.add_argument("a")
    cmp_.add_argument("b")
    cmp_.add_argument("--alpha", type=float, default=0.05)
    cmp_.add_argument("--naive-ttest", action="store_true")
    cmp_.add_argument("--out", help="write the comparison as JSON")

    insp = sub.add_parser("inspect-data", help="summarize a dataset file")
    insp.add_argument("path")
    insp.add_argument("--lenient", action="store_true")
    insp.add_argument("--json", action="store_true")

    fit = sub.add_parser("fit", help="train the first configured pipeline and save it as JSON")
    _add_experiment_args(fit)
    fit.add_argument("--model-out", required=True)

    pred = sub.add_parser("predict", help="score a CSV with a saved model")
    pred.add_argument("model")
    pred.add_argument("data")
    pred.add_argument("--out", help="CSV of bidder_id, auction_id, p_fraud, prediction")
    pred.add_argument("--lenient", action="store_true")

    syn = sub.add_parser("make-synthetic", help="write a Gaussian-mixture dataset with known Bayes error")
    syn.add_argument("--out", required=True)
    syn.add_argument("--n-labeled", type=int, default=945)
    syn.add_argument("--n-unlabeled", type=int, default=8346)
    syn.add_argument("--ratio", type=float, default=5.0)
    syn.add_argument("--separation", type=float, default=MixtureSpec.separation)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--profile", choices=sorted(SHIFT_PROFILES), default=MixtureSpec.profile)
    return parser


def _dispatch(args) -> None:
    if args.command == "run":
        cmd_run(_config_from_args(args))
    elif args.command == "tune":
        cfg = _config_from_args(args)
        extra = {}
        for item in args.grid or []:
            key, sep, values = item.partition("=")
            if not sep:
                raise ConfigError(f"--grid expects KEY=V1,V2,..., got {item!r}")
            extra[key.strip()] = parse_list(values)
        if extra or args.tune_pipeline:
            cfg = dataclasses.replace(
                cfg,
                tune_grid={**cfg.tune_grid, **extra},
                tune_pipeline=args.tune_pipeline or cfg.tune_pipeline,
            )
        cmd_tune(cfg)
    elif args.command == "compare":
        cmd_compare(args.a, args.b, args.alpha, not args.naive_ttest, args.out)
    elif args.command == "inspect-data":
        cmd_inspect(args.path, "lenient" if args.lenient else "strict", args.json)
    elif args.command == "fit":
        cmd_fit(_config_from_args(args), args.model_out)
    elif args.command == "predict":
        cmd_predict(args.model, args.data, args.out, "lenient" if args.lenient else "strict")
    elif args.command == "make-synthetic":
        try:
            spec = MixtureSpec(args.n_labeled, args.n_unlabeled, args.ratio, args.separation, args.seed, args.profile)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        cmd_make_synthetic(spec, args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _dispatch(args)
    except (UsageError, ConfigError, DatasetError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
