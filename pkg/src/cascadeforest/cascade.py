"""Cascade of forest layers with out-of-fold stacking.

Each layer holds four ensembles (random forest, extra trees, boosted
trees, logistic — always in that order), every ensemble being the k
fold-models of a stratified k-fold fit. A layer's out-of-fold probability
blocks are concatenated with the *original* features to feed the next
layer, so every layer past the first consumes ``base_dim + 4*K`` columns.
Growth stops once ``patience`` consecutive layers fail to beat the running
best accuracy by more than ``improvement_epsilon``; inference runs through
the best recorded layer only.

Every random stream derives from (cascade seed, layer, learner, fold), so
fitting is schedule-independent: one thread or many give identical models.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dataset import FoldAssignment, stratified_kfold
from .learners import (
    LEARNER_KINDS,
    FittedLearner,
    LearnerConfig,
    default_learner_configs,
    fit_learner,
    predict_proba,
)
from .seeding import derive_seed

_FOLD_TAG = 1  # seed-word tags keeping fold and learner streams distinct
_LEARNER_TAG = 2


@dataclass(frozen=True)
class CascadeConfig:
    """Cascade hyperparameters; ``learner_configs`` must be the four kinds
    in fixed order (random_forest, extra_trees, boosted_trees, logistic)."""

    k_folds: int = 5
    learner_configs: tuple[LearnerConfig, ...] = ()
    max_layers: int = 10
    patience: int = 1
    improvement_epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.learner_configs:
            object.__setattr__(self, "learner_configs", default_learner_configs(self.seed))
        else:
            object.__setattr__(self, "learner_configs", tuple(self.learner_configs))
        if self.k_folds < 2:
            raise ValueError(f"k_folds must be at least 2, got {self.k_folds}")
        if self.max_layers < 1:
            raise ValueError(f"max_layers must be at least 1, got {self.max_layers}")
        if self.patience < 1:
            raise ValueError(f"patience must be at least 1, got {self.patience}")
        if self.improvement_epsilon < 0:
            raise ValueError(
                f"improvement_epsilon must be non-negative, got {self.improvement_epsilon}"
            )
        kinds = tuple(c.learner_kind for c in self.learner_configs)
        if kinds != LEARNER_KINDS:
            raise ValueError(
                f"learner_configs must be the four kinds in order {LEARNER_KINDS}, got {kinds}"
            )


@dataclass
class CascadeLayer:
    ensembles: list[list[FittedLearner]]  # 4 entries of k fold-models each
    layer_accuracy: float
    input_dim: int


@dataclass
class CascadeModel:
    layers: list[CascadeLayer]
    best_layer_index: int
    n_classes: int
    base_dim: int
    label_mapping: np.ndarray  # dense class c -> original label value
    config: CascadeConfig
    layer_accuracies: list[float] = field(default_factory=list)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return predict_cascade(self, X)

    def predict_labels(self, X: np.ndarray) -> np.ndarray:
        return predict_labels(self, X)


class GrowthController:
    """Patience/epsilon stopping rule over the layer accuracy sequence.

    ``update`` returns True once `patience` consecutive layers have failed
    to exceed the running best accuracy by more than ``epsilon``. The best
    layer is the argmax of the sequence, lowest index on ties.
    """

    def __init__(self, patience: int, epsilon: float) -> None:
        self.patience = patience
        self.epsilon = epsilon
        self.best_accuracy = -np.inf
        self.best_index = -1
        self.bad_streak = 0
        self._count = 0

    def update(self, accuracy: float) -> bool:
        if accuracy > self.best_accuracy + self.epsilon:
            self.bad_streak = 0
        else:
            self.bad_streak += 1
        if accuracy > self.best_accuracy:
            self.best_accuracy = accuracy
            self.best_index = self._count
        self._count += 1
        return self.bad_streak >= self.patience


def augment_features(X_base: np.ndarray, probas: Sequence[np.ndarray]) -> np.ndarray:
    """Concatenate base features with the four class-probability blocks."""
    X_base = np.asarray(X_base, dtype=np.float64)
    if len(probas) != len(LEARNER_KINDS):
        raise ValueError(f"expected {len(LEARNER_KINDS)} probability blocks, got {len(probas)}")
    blocks = [np.asarray(p, dtype=np.float64) for p in probas]
    widths = {b.shape[1] for b in blocks}
    if len(widths) != 1:
        raise ValueError(f"probability blocks disagree on class count: {sorted(widths)}")
    for b in blocks:
        if b.shape[0] != X_base.shape[0]:
            raise ValueError(
                f"row-count mismatch: features have {X_base.shape[0]} rows, "
                f"probability block has {b.shape[0]}"
            )
    return np.hstack([X_base] + blocks)


def _fit_fold(
    X: np.ndarray,
    y: np.ndarray,
    cfg: LearnerConfig,
    folds: FoldAssignment,
    fold: int,
    n_classes: int,
) -> tuple[FittedLearner, np.ndarray, np.ndarray]:
    """Fit one fold-model and predict its held-out rows."""
    train_idx = folds.train_indices(fold)
    test_idx = folds.test_indices(fold)
    cfg_fold = cfg.with_seed(derive_seed(cfg.seed, fold))
    model = fit_learner(X[train_idx], y[train_idx], cfg_fold, n_classes=n_classes)
    return model, test_idx, predict_proba(model, X[test_idx])


def oof_probabilities(
    X: np.ndarray,
    y: np.ndarray,
    learner_cfg: LearnerConfig,
    folds: FoldAssignment,
    n_classes: int | None = None,
) -> tuple[np.ndarray, list[FittedLearner]]:
    """Out-of-fold class probabilities plus the k fitted fold-models.

    Every row's probability vector comes from the model fitted on the folds
    that exclude it.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    oof = np.zeros((X.shape[0], n_classes))
    models: list[FittedLearner] = []
    for f in range(folds.k):
        model, test_idx, proba = _fit_fold(X, y, learner_cfg, folds, f, n_classes)
        oof[test_idx] = proba
        models.append(model)
    return oof, models


def _ensemble_proba(models: Sequence[FittedLearner], X: np.ndarray) -> np.ndarray:
    acc = predict_proba(models[0], X)
    for model in models[1:]:
        acc = acc + predict_proba(model, X)
    return acc / len(models)


def fit_cascade(
    X_train: np.ndarray,
    y_train: np.ndarray,
    cfg: CascadeConfig,
    n_classes: int | None = None,
    label_mapping: np.ndarray | None = None,
    threads: int = 1,
    on_layer: Callable[[int, float], None] | None = None,
) -> CascadeModel:
    """Grow the cascade until the stopping rule fires or max_layers is hit.

    ``threads`` parallelizes the 4 x k_folds independent fold-fits within a
    layer; results are identical for any thread count. ``on_layer`` is
    called with (layer index, out-of-fold accuracy) as each layer finishes.
    """
    X = np.asarray(X_train, dtype=np.float64)
    y = np.asarray(y_train, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValueError(f"features {X.shape} and labels ({len(y)},) do not pair up")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if label_mapping is None:
        label_mapping = np.arange(n_classes, dtype=np.int64)
    base_dim = X.shape[1]

    controller = GrowthController(cfg.patience, cfg.improvement_epsilon)
    layers: list[CascadeLayer] = []
    accuracies: list[float] = []
    X_cur = X
    for layer_idx in range(cfg.max_layers):
        folds = stratified_kfold(y, cfg.k_folds, seed=derive_seed(cfg.seed, _FOLD_TAG, layer_idx))
        layer_cfgs = [
            lc.with_seed(derive_seed(cfg.seed, _LEARNER_TAG, layer_idx, li))
            for li, lc in enumerate(cfg.learner_configs)
        ]
        blocks = [np.zeros((X.shape[0], n_classes)) for _ in layer_cfgs]
        ensembles: list[list[FittedLearner]] = [[None] * cfg.k_folds for _ in layer_cfgs]

        tasks = [(li, f) for li in range(len(layer_cfgs)) for f in range(cfg.k_folds)]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(
                    pool.map(
                        lambda t: _fit_fold(X_cur, y, layer_cfgs[t[0]], folds, t[1], n_classes),
                        tasks,
                    )
                )
        else:
            results = [
                _fit_fold(X_cur, y, layer_cfgs[li], folds, f, n_classes) for li, f in tasks
            ]
        for (li, f), (model, test_idx, proba) in zip(tasks, results):
            ensembles[li][f] = model
            blocks[li][test_idx] = proba

        mean_block = sum(blocks) / len(blocks)
        layer_acc = float(np.mean(np.argmax(mean_block, axis=1) == y))
        layers.append(
            CascadeLayer(ensembles=ensembles, layer_accuracy=layer_acc, input_dim=X_cur.shape[1])
        )
        accuracies.append(layer_acc)
        if on_layer is not None:
            on_layer(layer_idx, layer_acc)
        if controller.update(layer_acc):
            break
        X_cur = augment_features(X, blocks)

    best_layer_index = int(np.argmax(accuracies))
    return CascadeModel(
        layers=layers,
        best_layer_index=best_layer_index,
        n_classes=n_classes,
        base_dim=base_dim,
        label_mapping=np.asarray(label_mapping, dtype=np.int64),
        config=cfg,
        layer_accuracies=accuracies,
    )


def predict_cascade(model: CascadeModel, X: np.ndarray) -> np.ndarray:
    """Propagate rows through layers 0..best and average the 4 ensembles."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.base_dim:
        raise ValueError(
            f"dimension mismatch: model expects {model.base_dim} base features, "
            f"got {X.shape[1] if X.ndim == 2 else X.shape}"
        )
    X_cur = X
    for layer_idx in range(model.best_layer_index + 1):
        layer = model.layers[layer_idx]
        blocks = [_ensemble_proba(models, X_cur) for models in layer.ensembles]
        if layer_idx == model.best_layer_index:
            return sum(blocks) / len(blocks)
        X_cur = augment_features(X, blocks)
    raise AssertionError("cascade has no layers")  # fit always records >= 1


def predict_labels(model: CascadeModel, X: np.ndarray) -> np.ndarray:
    """Argmax of predict_cascade (lowest class on ties), mapped back to the
    original label values."""
    proba = predict_cascade(model, X)
    dense = np.argmax(proba, axis=1)
    return model.label_mapping[dense]
