"""Cost-sensitive semi-supervised classification for shill-bidding fraud detection."""

from .cost import CostMatrix, MetaCostConfig, metacost_relabel, metacost_train, min_risk_class, total_cost
from .dataset import Dataset, FoldPlan, Instance, Label, load_csv, split_labeled_unlabeled, stratified_kfold
from .pipeline import PipelineSpec, reference_pipelines
from .semi_supervised import ChopperConfig, YatsiConfig, chopper_train, yatsi_train

__version__ = "0.1.0"

__all__ = [
    "ChopperConfig",
    "CostMatrix",
    "Dataset",
    "FoldPlan",
    "Instance",
    "Label",
    "MetaCostConfig",
    "PipelineSpec",
    "YatsiConfig",
    "chopper_train",
    "load_csv",
    "metacost_relabel",
    "metacost_train",
    "min_risk_class",
    "reference_pipelines",
    "split_labeled_unlabeled",
    "stratified_kfold",
    "total_cost",
    "yatsi_train",
]
