"""Experiment configuration: INI files plus command-line overrides.

Layout::

    [experiment]
    data = labeled.csv           ; rows with an empty label are unlabeled
    unlabeled = pool.csv         ; optional extra unlabeled rows
    schema = strict
    k = 10
    runs = 10
    seed = 0
    penalties = 2, 3, 4, 5
    cost_fp = 1
    pipelines = csl-yatsi-knn, csl-yatsi-nb, csl-yatsi-j48, csl-chopper
    out = results
    formats = csv, json
    jobs = 1

    [rf]                         ; learner / stage sections apply to every pipeline
    n_trees = 100

    [pipeline:small-chopper]     ; custom pipeline derived from a built-in one
    base = csl-chopper
    rf.n_trees = 20

    [tune]
    pipeline = csl-yatsi-knn
    yatsi.k = 1, 3, 5

Section names ``nb``, ``j48``, ``rf``, ``knn``, ``yatsi``, ``chopper`` and
``metacost`` map to the dotted parameters of :meth:`PipelineSpec.with_params`.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .cost import CostMatrix, MetaCostConfig
from .pipeline import PipelineSpec, reference_pipelines

PARAM_SECTIONS = ("nb", "j48", "rf", "knn", "yatsi", "chopper", "metacost")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


def parse_scalar(text: str) -> Any:
    """INI value to int, float, bool, None or (stripped) string."""
    s = text.strip()
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", ""):
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def parse_list(text: str) -> list[Any]:
    return [parse_scalar(v) for v in text.split(",") if v.strip()]


def builtin_pipelines(seed: int = 0) -> dict[str, PipelineSpec]:
    """The four CSL pipelines and their plain-SSC counterparts, by name."""
    specs = reference_pipelines(MetaCostConfig(), CostMatrix(), seed) + reference_pipelines(None, CostMatrix(), seed)
    return {p.name: p for p in specs}


@dataclass(frozen=True)
class ExperimentConfig:
    data: Optional[str] = None
    unlabeled: Optional[str] = None
    schema: str = "strict"
    scale: bool = False
    k: int = 10
    runs: int = 10
    seed: int = 0
    penalties: tuple = (2.0, 3.0, 4.0, 5.0)
    cost_fp: float = 1.0
    pipelines: tuple = ("csl-yatsi-knn", "csl-yatsi-nb", "csl-yatsi-j48", "csl-chopper")
    out: str = "results"
    formats: tuple = FORMATS
    jobs: int = 1
    alpha: float = 0.05
    corrected: bool = True
    min_risk_predict: bool = False
    params: dict = field(default_factory=dict)
    custom: dict = field(default_factory=dict)
    tune_pipeline: Optional[str] = None
    tune_grid: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 2:
            raise ConfigError(f"k must be >= 2, got {self.k}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if not self.pipelines:
            raise ConfigError("at least one pipeline is required")
        if not self.penalties:
            raise ConfigError("at least one penalty is required")
        if self.schema not in ("strict", "lenient"):
            raise ConfigError(f"schema must be strict or lenient, got {self.schema!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown output formats: {sorted(bad)}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")

    def pipeline(self, name: str) -> PipelineSpec:
        """Resolve a pipeline name (built-in or custom) with all global overrides applied."""
        registry = builtin_pipelines(self.seed)
        overrides: dict[str, Any] = {}
        if name in self.custom:
            custom = dict(self.custom[name])
            base = custom.pop("base", None)
            if base not in registry:
                raise ConfigError(f"pipeline {name!r} needs base = one of {', '.join(registry)}")
            spec = dataclasses.replace(registry[base], name=name)
            overrides = custom
        elif name in registry:
            spec = registry[name]
        else:
            known = list(registry) + list(self.custom)
            raise ConfigError(f"unknown pipeline {name!r}; known: {', '.join(known)}")
        try:
            spec = spec.with_params(self.params).with_params(overrides)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"pipeline {name!r}: {exc}") from exc
        spec = dataclasses.replace(
            spec,
            seed=self.seed,
            cost=CostMatrix(c_fn=float(self.penalties[0]), c_fp=float(self.cost_fp)),
            min_risk_predict=self.min_risk_predict,
        )
        return spec

    def resolved_pipelines(self) -> list[PipelineSpec]:
        return [self.pipeline(n) for n in self.pipelines]

    def to_dict(self, runtime: bool = True) -> dict:
        """Plain form; ``runtime=False`` drops settings that cannot change results (jobs, out)."""
        out = dataclasses.asdict(self)
        if not runtime:
            del out["jobs"], out["out"]
        out["penalties"] = list(self.penalties)
        out["pipelines"] = list(self.pipelines)
        out["formats"] = list(self.formats)
        out["tune_grid"] = {k: list(v) for k, v in self.tune_grid.items()}
        return out


_EXPERIMENT_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)} - {
    "params",
    "custom",
    "tune_pipeline",
    "tune_grid",
}


def _coerce(key: str, value: Any) -> Any:
    if key in ("penalties",):
        vals = value if isinstance(value, (list, tuple)) else parse_list(str(value))
        return tuple(float(v) for v in vals)
    if key in ("pipelines", "formats"):
        vals = value if isinstance(value, (list, tuple)) else [v.strip() for v in str(value).split(",") if v.strip()]
        return tuple(str(v) for v in vals)
    if key in ("k", "runs", "seed", "jobs"):
        return int(value)
    if key in ("cost_fp", "alpha"):
        return float(value)
    if key in ("scale", "corrected", "min_risk_predict"):
        return value if isinstance(value, bool) else bool(parse_scalar(str(value)))
    return value


def _build(fields: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig(**fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Read an INI file (optional) and apply ``overrides`` on top.

    Relative data paths in the file resolve against the file's directory.
    ``overrides`` holds experiment keys (``k``, ``data`` ...) or dotted
    pipeline parameters (``rf.n_trees``).
    """
    fields: dict[str, Any] = {"params": {}, "custom": {}, "tune_grid": {}}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        parser.optionxform = str
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for section in parser.sections():
            items = dict(parser.items(section))
            if section == "experiment":
                for key, raw in items.items():
                    if key not in _EXPERIMENT_KEYS:
                        raise ConfigError(f"{path}: unknown key {key!r} in [experiment]")
                    value = raw.strip()
                    if key in ("data", "unlabeled") and value:
                        value = str((path.parent / value) if not Path(value).is_absolute() else Path(value))
                    fields[key] = _coerce(key, value)
            elif section in PARAM_SECTIONS:
                for key, raw in items.items():
                    fields["params"][f"{section}.{key}"] = parse_scalar(raw)
            elif section.startswith("pipeline:"):
                name = section.split(":", 1)[1].strip()
                fields["custom"][name] = {k: (v.strip() if k == "base" else parse_scalar(v)) for k, v in items.items()}
            elif section == "tune":
                for key, raw in items.items():
                    if key == "pipeline":
                        fields["tune_pipeline"] = raw.strip()
                    else:
                        fields["tune_grid"][key] = parse_list(raw)
            else:
                raise ConfigError(f"{path}: unknown section [{section}]")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in _EXPERIMENT_KEYS:
            fields[key] = _coerce(key, value)
        elif key == "tune_pipeline":
            fields[key] = value
        elif "." in key:
            fields["params"][key] = value if not isinstance(value, str) else parse_scalar(value)
        else:
            raise ConfigError(f"unknown setting {key!r}")
    return _build(fields)
