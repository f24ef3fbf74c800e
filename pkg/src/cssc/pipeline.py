"""Declarative description of a CSL+SSC model and the code that trains it."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .cost import CostMatrix, MetaCostConfig, bagged_fraud_probabilities, metacost_train
from .learners import ForestConfig, KnnConfig, LearnerConfigs, NbConfig, ProbabilisticClassifier, TreeConfig
from .learners.distribution import as_matrix
from .seeding import Seed
from .semi_supervised import ChopperConfig, YatsiConfig, chopper_train, yatsi_train

SSC_KINDS = ("yatsi", "chopper")


@dataclass(frozen=True)
class PipelineSpec:
    """One CSL+SSC combination.

    ``metacost=None`` gives the plain SSC baseline. ``transductive`` controls
    whether the evaluation harness adds the held-out fold's features to the
    unlabeled pool; by default only Chopper does.
    """

    name: str = "csl-chopper"
    ssc: str = "chopper"
    yatsi: YatsiConfig = field(default_factory=YatsiConfig)
    chopper: ChopperConfig = field(default_factory=ChopperConfig)
    learners: LearnerConfigs = field(default_factory=LearnerConfigs)
    metacost: Optional[MetaCostConfig] = field(default_factory=MetaCostConfig)
    cost: CostMatrix = field(default_factory=CostMatrix)
    seed: int = 0
    min_risk_predict: bool = False
    transductive: Optional[bool] = None

    def __post_init__(self):
        if self.ssc not in SSC_KINDS:
            raise ValueError(f"unknown SSC algorithm {self.ssc!r}; expected one of {', '.join(SSC_KINDS)}")

    @property
    def is_transductive(self) -> bool:
        return self.ssc == "chopper" if self.transductive is None else self.transductive

    @property
    def learner_names(self) -> tuple[str, ...]:
        if self.ssc == "yatsi":
            return (self.yatsi.first_learner,)
        return (self.chopper.first_learner, self.chopper.second_learner)

    def fit_ssc(self, X_labeled, y_labeled, X_unlabeled, seed: Seed = 0) -> ProbabilisticClassifier:
        if self.ssc == "yatsi":
            return yatsi_train(X_labeled, y_labeled, X_unlabeled, self.yatsi, self.learners, seed)
        model, _ = chopper_train(X_labeled, y_labeled, X_unlabeled, self.chopper, self.learners, seed)
        return model

    def bagged(self, X_labeled, y_labeled, X_unlabeled, seed: Seed = 0) -> np.ndarray:
        if self.metacost is None:
            raise ValueError(f"pipeline {self.name!r} has no MetaCost stage")
        return bagged_fraud_probabilities(X_labeled, y_labeled, X_unlabeled, self, self.metacost, seed)

    def fit(self, X_labeled, y_labeled, X_unlabeled=None, seed: Seed = 0, bagged=None, cache=None) -> ProbabilisticClassifier:
        """Train the full pipeline; ``bagged`` and ``cache`` reuse MetaCost work."""
        X_l = as_matrix(X_labeled)
        if X_unlabeled is None:
            X_unlabeled = np.empty((0, X_l.shape[1]))
        if self.metacost is None:
            return self.fit_ssc(X_l, y_labeled, X_unlabeled, seed)
        return metacost_train(
            X_l,
            y_labeled,
            X_unlabeled,
            self,
            self.cost,
            self.metacost,
            seed,
            bagged=bagged,
            min_risk_predict=self.min_risk_predict,
            cache=cache,
        )

    def with_cost(self, cost: CostMatrix) -> "PipelineSpec":
        return dataclasses.replace(self, cost=cost)

    def with_params(self, params: dict[str, Any]) -> "PipelineSpec":
        """Copy with dotted overrides such as ``{"rf.n_trees": 50, "yatsi.k": 3}``.

        Recognised prefixes: ``nb``, ``j48``, ``rf``, ``knn`` (learner
        settings), ``yatsi``, ``chopper``, ``metacost`` and ``cost``; bare names
        address top-level fields.
        """
        spec = self
        for key, value in params.items():
            spec = _set_path(spec, key, value)
        return spec

    def to_dict(self) -> dict:
        return _to_plain(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineSpec":
        data = dict(data)
        learners = data.pop("learners", {}) or {}
        kwargs: dict[str, Any] = {}
        for key in ("name", "ssc", "seed", "min_risk_predict", "transductive"):
            if key in data:
                kwargs[key] = data[key]
        if "yatsi" in data:
            kwargs["yatsi"] = YatsiConfig(**data["yatsi"])
        if "chopper" in data:
            kwargs["chopper"] = ChopperConfig(**data["chopper"])
        if "cost" in data:
            kwargs["cost"] = CostMatrix(**data["cost"])
        if "metacost" in data:
            kwargs["metacost"] = None if data["metacost"] is None else MetaCostConfig(**data["metacost"])
        kwargs["learners"] = LearnerConfigs(
            nb=NbConfig(**learners.get("nb", {})),
            j48=TreeConfig(**learners.get("j48", {})),
            rf=ForestConfig(**learners.get("rf", {})),
            knn=KnnConfig(**learners.get("knn", {})),
        )
        return cls(**kwargs)


_LEARNER_PREFIXES = ("nb", "j48", "rf", "knn")
_STAGE_DEFAULTS = {"yatsi": YatsiConfig, "chopper": ChopperConfig, "metacost": MetaCostConfig, "cost": CostMatrix}


def _set_path(spec: PipelineSpec, key: str, value) -> PipelineSpec:
    head, _, attr = key.partition(".")
    if not attr:
        _check_field(spec, head, key)
        return dataclasses.replace(spec, **{head: value})
    if head in _LEARNER_PREFIXES:
        sub = getattr(spec.learners, head)
        _check_field(sub, attr, key)
        learners = dataclasses.replace(spec.learners, **{head: dataclasses.replace(sub, **{attr: value})})
        return dataclasses.replace(spec, learners=learners)
    if head in ("yatsi", "chopper", "metacost", "cost"):
        sub = getattr(spec, head)
        if sub is None:
            # plain pipelines stay plain; the key is still checked
            _check_field(_STAGE_DEFAULTS[head](), attr, key)
            return spec
        _check_field(sub, attr, key)
        return dataclasses.replace(spec, **{head: dataclasses.replace(sub, **{attr: value})})
    raise KeyError(f"unknown parameter {key!r}")


def _check_field(obj, name: str, key: str) -> None:
    if name not in {f.name for f in dataclasses.fields(obj)}:
        raise KeyError(f"unknown parameter {key!r}")


def _to_plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


def reference_pipelines(
    metacost: Optional[MetaCostConfig] = MetaCostConfig(),
    cost: CostMatrix = CostMatrix(),
    seed: int = 0,
) -> list[PipelineSpec]:
    """The four CSL+SSC models with the tuned settings reported for them.

    RF: 100 trees, depth 12. k-NN: 5 neighbours. J48: confidence 0.75, two
    instances per leaf. Yatsi weighting factor 1.0. MetaCost: 10 bags.
    """
    learners = LearnerConfigs(
        j48=TreeConfig(confidence_factor=0.75, min_leaf=2),
        rf=ForestConfig(n_trees=100, max_depth=12),
        knn=KnnConfig(k=5),
    )
    prefix = "csl-" if metacost is not None else ""
    common = dict(learners=learners, metacost=metacost, cost=cost, seed=seed)
    return [
        PipelineSpec(name=f"{prefix}yatsi-knn", ssc="yatsi", yatsi=YatsiConfig("knn", 5, 1.0), **common),
        PipelineSpec(name=f"{prefix}yatsi-nb", ssc="yatsi", yatsi=YatsiConfig("nb", 5, 1.0), **common),
        PipelineSpec(name=f"{prefix}yatsi-j48", ssc="yatsi", yatsi=YatsiConfig("j48", 5, 1.0), **common),
        PipelineSpec(name=f"{prefix}chopper", ssc="chopper", chopper=ChopperConfig("nb", "rf"), **common),
    ]
