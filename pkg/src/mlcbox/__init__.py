"""Composable multi-label classification pipelines.

Stages such as PCA, CBMLC clustering and PLST label-space reduction can be
stacked in any order in front of a terminal strategy (BR, CC, rCC, LP,
RAkEL, RPC, RSL) that delegates to a ridge, linear SVM or kNN base learner.
"""

from ._util import ConfigError
from .config import ExperimentConfig, parse_config, parse_config_text, render_config
from .dataset import (
    CVSplit,
    Dataset,
    DatasetParseError,
    dataset_stats,
    kfold_split,
    load_svmlight_multilabel,
    write_svmlight_multilabel,
)
from .evaluation import evaluate, example_metrics, label_metrics, ranking_metrics
from .experiment import ExperimentReport, FoldError, run_cv_experiment
from .learners import BinaryLearnerSpec
from .pipeline import (
    Param,
    PipelineConfig,
    Problem,
    ProblemTree,
    StageSpec,
    fit,
    predict,
    register_method,
    registered_methods,
    validate_config,
)
from .thresholding import ThresholdSpec, apply_pcut, apply_rcut, apply_scut

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "parse_config_text",
    "render_config",
    "CVSplit",
    "Dataset",
    "DatasetParseError",
    "dataset_stats",
    "kfold_split",
    "load_svmlight_multilabel",
    "write_svmlight_multilabel",
    "evaluate",
    "example_metrics",
    "label_metrics",
    "ranking_metrics",
    "ExperimentReport",
    "FoldError",
    "run_cv_experiment",
    "BinaryLearnerSpec",
    "Param",
    "PipelineConfig",
    "Problem",
    "ProblemTree",
    "StageSpec",
    "fit",
    "predict",
    "register_method",
    "registered_methods",
    "validate_config",
    "ThresholdSpec",
    "apply_pcut",
    "apply_rcut",
    "apply_scut",
]
