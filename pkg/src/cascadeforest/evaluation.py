"""Metrics and the experiment harness.

``run_experiment`` runs the standard protocol: stratified train/test
split, cascade fit on the training part, accuracy on both partitions.
``outer_cross_validate`` wraps the same fit in an outer stratified k-fold
loop, refitting from scratch per fold. Reports serialize to JSON with
stable key names.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .cascade import CascadeConfig, CascadeModel, fit_cascade, predict_cascade
from .dataset import (
    SplitSpec,
    encode_labels,
    load_features,
    stratified_kfold,
    stratified_split,
)
from .errors import DataFormatError
from .seeding import derive_seed

_OUTER_CV_TAG = 3


def accuracy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Fraction of exact matches."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    return float(np.mean(y_true == y_pred))


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> np.ndarray:
    """Counts with entry (i, j) = true class i predicted as class j."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    for name, y in (("true", y_true), ("predicted", y_pred)):
        if (y < 0).any() or (y >= n_classes).any():
            raise ValueError(f"{name} labels must lie in 0..{n_classes - 1}")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def per_class_recall(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> np.ndarray:
    cm = confusion_matrix(y_true, y_pred, n_classes)
    support = cm.sum(axis=1)
    if (support == 0).any():
        missing = int(np.flatnonzero(support == 0)[0])
        raise ValueError(f"class {missing} absent from y_true")
    return np.diag(cm) / support


def balanced_accuracy(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> float:
    """Mean over classes of per-class recall; every class must appear."""
    return float(np.mean(per_class_recall(y_true, y_pred, n_classes)))


@dataclass
class EvaluationReport:
    train_accuracy: float
    test_accuracy: float
    balanced_accuracy: float
    per_class_recall: list[float]
    confusion: list[list[int]]  # test-partition confusion counts
    layer_accuracies: list[float]
    best_layer_index: int
    wall_time_seconds: float
    seed: int
    config: dict
    n_train: int = 0
    n_test: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    def summary_lines(self) -> list[str]:
        lines = [
            f"train accuracy:    {self.train_accuracy * 100:.4f}%",
            f"test accuracy:     {self.test_accuracy * 100:.4f}%",
            f"balanced accuracy: {self.balanced_accuracy * 100:.4f}%",
            f"layers: {len(self.layer_accuracies)} (best layer {self.best_layer_index})",
            "layer accuracies:  "
            + ", ".join(f"{a * 100:.4f}%" for a in self.layer_accuracies),
            f"wall time: {self.wall_time_seconds:.2f}s  (train n={self.n_train}, test n={self.n_test})",
        ]
        return lines


def _evaluate_model(
    model: CascadeModel,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_test: np.ndarray,
    y_test: np.ndarray,
    seed: int,
    elapsed: float,
) -> EvaluationReport:
    pred_train = np.argmax(predict_cascade(model, X_train), axis=1)
    pred_test = np.argmax(predict_cascade(model, X_test), axis=1)
    K = model.n_classes
    return EvaluationReport(
        train_accuracy=accuracy(y_train, pred_train),
        test_accuracy=accuracy(y_test, pred_test),
        balanced_accuracy=balanced_accuracy(y_test, pred_test, K),
        per_class_recall=[float(r) for r in per_class_recall(y_test, pred_test, K)],
        confusion=confusion_matrix(y_test, pred_test, K).tolist(),
        layer_accuracies=list(model.layer_accuracies),
        best_layer_index=model.best_layer_index,
        wall_time_seconds=elapsed,
        seed=seed,
        config=asdict(model.config),
        n_train=len(y_train),
        n_test=len(y_test),
    )


def evaluate_split(
    X: np.ndarray,
    y: np.ndarray,
    cfg: CascadeConfig,
    split: SplitSpec,
    threads: int = 1,
    on_layer=None,
) -> tuple[EvaluationReport, CascadeModel]:
    """Split, fit, and score; returns the report and the fitted cascade."""
    start = time.perf_counter()
    dense, mapping = encode_labels(y)
    train_idx, test_idx = stratified_split(X, dense, split)
    if len(test_idx) == 0:
        raise ValueError(
            "stratified split produced an empty test set; "
            "increase test_fraction or the dataset size"
        )
    n_classes = len(mapping)
    model = fit_cascade(
        X[train_idx],
        dense[train_idx],
        cfg,
        n_classes=n_classes,
        label_mapping=mapping,
        threads=threads,
        on_layer=on_layer,
    )
    report = _evaluate_model(
        model,
        X[train_idx],
        dense[train_idx],
        X[test_idx],
        dense[test_idx],
        seed=split.seed,
        elapsed=time.perf_counter() - start,
    )
    return report, model


def run_experiment(
    dataset_path: str | Path,
    cfg: CascadeConfig,
    split: SplitSpec,
    threads: int = 1,
    on_layer=None,
) -> EvaluationReport:
    """Load a labeled feature file and run the split/train/score protocol."""
    X, y = load_features(dataset_path)
    if y is None:
        raise DataFormatError(f"labels required: {dataset_path} has no label column")
    report, _ = evaluate_split(X, y, cfg, split, threads=threads, on_layer=on_layer)
    return report


def outer_cross_validate(
    dataset_path: str | Path,
    cfg: CascadeConfig,
    k_outer: int,
    seed: int,
    threads: int = 1,
) -> list[EvaluationReport]:
    """k_outer reports; fold f is tested on fold f, trained on the rest."""
    X, y = load_features(dataset_path)
    if y is None:
        raise DataFormatError(f"labels required: {dataset_path} has no label column")
    dense, mapping = encode_labels(y)
    n_classes = len(mapping)
    folds = stratified_kfold(dense, k_outer, seed)
    reports = []
    for f in range(k_outer):
        start = time.perf_counter()
        train_idx = folds.train_indices(f)
        test_idx = folds.test_indices(f)
        fold_cfg = replace(cfg, seed=derive_seed(seed, _OUTER_CV_TAG, f))
        model = fit_cascade(
            X[train_idx],
            dense[train_idx],
            fold_cfg,
            n_classes=n_classes,
            label_mapping=mapping,
            threads=threads,
        )
        reports.append(
            _evaluate_model(
                model,
                X[train_idx],
                dense[train_idx],
                X[test_idx],
                dense[test_idx],
                seed=seed,
                elapsed=time.perf_counter() - start,
            )
        )
    return reports


def summarize_reports(reports: list[EvaluationReport]) -> dict:
    accs = np.array([r.test_accuracy for r in reports])
    return {
        "mean_test_accuracy": float(accs.mean()),
        "std_test_accuracy": float(accs.std()),
        "n_folds": len(reports),
    }
