"""JSON form of trained models.

Every model maps to a dict with a ``"type"`` tag and plain lists/numbers, so
``json.dumps`` round-trips it exactly (floats are written with ``repr``).
k-d trees are not stored; they are rebuilt from the reference points, which
is deterministic.

=============  ==============================================================
type           fields
=============  ==============================================================
nb             priors, means, variances, only_class
tree           feature, threshold (null at leaves), left, right, counts,
               only_class, config
forest         trees (list of tree dicts), config, only_class
knn            points, labels, weights, k
yatsi          points, labels, weights, is_prelabeled, k, unlabeled_weight
chopper        final (model dict), chop_order, chop_round, pool_fraud
               (null for unchopped), pseudo_labels, n_rounds
cost_sensitive final (model dict), relabeled, bagged, cost, min_risk_predict
=============  ==============================================================
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .cost import CostMatrix, CostSensitiveModel
from .learners import ForestConfig, ForestModel, KdTree, KnnModel, NbModel, TreeConfig, TreeModel
from .semi_supervised import ChopperModel, YatsiModel

FORMAT_VERSION = 1


def _floats(a) -> list:
    return [None if math.isnan(v) else v for v in np.asarray(a, dtype=np.float64).reshape(-1).tolist()]


def _unfloats(values, shape=None) -> np.ndarray:
    a = np.array([math.nan if v is None else v for v in values], dtype=np.float64)
    return a.reshape(shape) if shape is not None else a


def _ints(a) -> list:
    return np.asarray(a).reshape(-1).astype(np.int64).tolist()


def model_to_dict(model) -> dict:
    if isinstance(model, NbModel):
        out = {
            "type": "nb",
            "priors": _floats(model.priors),
            "means": np.asarray(model.means).tolist(),
            "variances": np.asarray(model.variances).tolist(),
            "only_class": model.only_class,
        }
    elif isinstance(model, TreeModel):
        out = {
            "type": "tree",
            "feature": _ints(model.feature),
            "threshold": _floats(model.threshold),
            "left": _ints(model.left),
            "right": _ints(model.right),
            "counts": np.asarray(model.counts, dtype=np.float64).tolist(),
            "only_class": model.only_class,
            "config": None if model.config is None else dataclasses.asdict(model.config),
        }
    elif isinstance(model, ForestModel):
        out = {
            "type": "forest",
            "trees": [model_to_dict(t) for t in model.trees],
            "config": dataclasses.asdict(model.config),
            "only_class": model.only_class,
        }
    elif isinstance(model, KnnModel):
        out = {
            "type": "knn",
            "points": np.asarray(model.points).tolist(),
            "labels": _ints(model.labels),
            "weights": _floats(model.weights),
            "k": model.k,
        }
    elif isinstance(model, YatsiModel):
        out = {
            "type": "yatsi",
            "points": model.points.tolist(),
            "labels": _ints(model.labels),
            "weights": _floats(model.weights),
            "is_prelabeled": np.asarray(model.is_prelabeled, dtype=bool).tolist(),
            "k": model.k,
            "unlabeled_weight": model.unlabeled_weight,
        }
    elif isinstance(model, ChopperModel):
        out = {
            "type": "chopper",
            "final": model_to_dict(model.final),
            "chop_order": _ints(model.chop_order),
            "chop_round": _ints(model.chop_round),
            "pool_fraud": _floats(model.pool_fraud),
            "pseudo_labels": _ints(model.pseudo_labels),
            "n_rounds": model.n_rounds,
        }
    elif isinstance(model, CostSensitiveModel):
        out = {
            "type": "cost_sensitive",
            "final": model_to_dict(model.final),
            "relabeled": _ints(model.relabeled),
            "bagged": _floats(model.bagged),
            "cost": model.cost.to_dict(),
            "min_risk_predict": model.min_risk_predict,
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    out["format_version"] = FORMAT_VERSION
    return out


def model_from_dict(data: dict):
    kind = data.get("type")
    if kind == "nb":
        return NbModel(
            priors=_unfloats(data["priors"]),
            means=np.array(data["means"], dtype=np.float64),
            variances=np.array(data["variances"], dtype=np.float64),
            only_class=data["only_class"],
        )
    if kind == "tree":
        cfg = data.get("config")
        return TreeModel(
            feature=np.array(data["feature"], dtype=np.int64),
            threshold=_unfloats(data["threshold"]),
            left=np.array(data["left"], dtype=np.int64),
            right=np.array(data["right"], dtype=np.int64),
            counts=np.array(data["counts"], dtype=np.float64).reshape(-1, 2),
            only_class=data["only_class"],
            config=None if cfg is None else TreeConfig(**cfg),
        )
    if kind == "forest":
        return ForestModel(
            trees=tuple(model_from_dict(t) for t in data["trees"]),
            config=ForestConfig(**data["config"]),
            only_class=data["only_class"],
        )
    if kind == "knn":
        points = np.array(data["points"], dtype=np.float64)
        return KnnModel(
            tree=KdTree(points),
            labels=np.array(data["labels"], dtype=np.int8),
            weights=_unfloats(data["weights"]),
            k=data["k"],
        )
    if kind == "yatsi":
        points = np.array(data["points"], dtype=np.float64)
        return YatsiModel(
            points=points,
            labels=np.array(data["labels"], dtype=np.int8),
            weights=_unfloats(data["weights"]),
            is_prelabeled=np.array(data["is_prelabeled"], dtype=bool),
            k=data["k"],
            unlabeled_weight=data["unlabeled_weight"],
            tree=KdTree(points),
        )
    if kind == "chopper":
        return ChopperModel(
            final=model_from_dict(data["final"]),
            chop_order=np.array(data["chop_order"], dtype=np.int64),
            chop_round=np.array(data["chop_round"], dtype=np.int64),
            pool_fraud=_unfloats(data["pool_fraud"]),
            pseudo_labels=np.array(data["pseudo_labels"], dtype=np.int8),
            n_rounds=data["n_rounds"],
        )
    if kind == "cost_sensitive":
        return CostSensitiveModel(
            final=model_from_dict(data["final"]),
            relabeled=np.array(data["relabeled"], dtype=np.int8),
            bagged=_unfloats(data["bagged"]),
            cost=CostMatrix(**data["cost"]),
            min_risk_predict=data["min_risk_predict"],
        )
    raise ValueError(f"unknown model type {kind!r}")
