"""Cascade deep-forest classification library.

Fixed-dimension feature vectors are classified by a stack of cascade
layers; each layer holds four probabilistic ensembles whose out-of-fold
class-probability vectors are concatenated with the original features to
feed the next layer, growing until accuracy stops improving.
"""

from .cascade import (
    CascadeConfig,
    CascadeLayer,
    CascadeModel,
    GrowthController,
    augment_features,
    fit_cascade,
    oof_probabilities,
    predict_cascade,
    predict_labels,
)
from .dataset import (
    FoldAssignment,
    SplitSpec,
    encode_labels,
    decode_labels,
    load_features,
    stratified_kfold,
    stratified_split,
    validate_features,
    validate_labels,
    write_features,
)
from .errors import CascadeForestError, DataFormatError, ModelFormatError
from .evaluation import (
    EvaluationReport,
    accuracy,
    balanced_accuracy,
    confusion_matrix,
    outer_cross_validate,
    per_class_recall,
    run_experiment,
    summarize_reports,
)
from .learners import (
    LEARNER_KINDS,
    LearnerConfig,
    default_learner_configs,
    fit_boosted_trees,
    fit_extra_trees,
    fit_learner,
    fit_logistic,
    fit_random_forest,
    fit_tree,
    predict_proba,
)
from .model_io import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "CascadeConfig",
    "CascadeForestError",
    "CascadeLayer",
    "CascadeModel",
    "DataFormatError",
    "EvaluationReport",
    "FoldAssignment",
    "GrowthController",
    "LEARNER_KINDS",
    "LearnerConfig",
    "ModelFormatError",
    "SplitSpec",
    "accuracy",
    "augment_features",
    "balanced_accuracy",
    "confusion_matrix",
    "decode_labels",
    "default_learner_configs",
    "encode_labels",
    "fit_boosted_trees",
    "fit_cascade",
    "fit_extra_trees",
    "fit_learner",
    "fit_logistic",
    "fit_random_forest",
    "fit_tree",
    "load_features",
    "load_model",
    "oof_probabilities",
    "outer_cross_validate",
    "per_class_recall",
    "predict_cascade",
    "predict_labels",
    "predict_proba",
    "run_experiment",
    "save_model",
    "stratified_kfold",
    "stratified_split",
    "summarize_reports",
    "validate_features",
    "validate_labels",
    "write_features",
]
