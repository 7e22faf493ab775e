"""The four probabilistic base classifiers behind every cascade layer.

All learners share one contract: fit on (features, integer labels), emit a
row-stochastic class-probability matrix via ``predict_proba``. The fixed
learner order used throughout the package is random forest, extra trees,
boosted trees, logistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .boosting import BoostedTreesModel, _fit_boosted
from .forests import ForestModel, _fit_forest
from .logistic import LogisticModel, _fit_logistic
from .seeding import make_rng
from .trees import Tree, grow_classification_tree

LEARNER_KINDS = ("random_forest", "extra_trees", "boosted_trees", "logistic")

FittedLearner = ForestModel | BoostedTreesModel | LogisticModel


@dataclass(frozen=True)
class LearnerConfig:
    """Hyperparameters for one base learner.

    Fields apply per ``learner_kind``: ``n_trees``/``bootstrap`` to the
    forests, ``n_rounds``/``learning_rate`` to boosting, ``max_iterations``
    to the logistic learner, ``l2_penalty`` to boosting and logistic.
    ``max_features`` is "sqrt", "all", or an explicit count.
    """

    learner_kind: str
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    max_features: str | int = "sqrt"
    bootstrap: bool = True
    learning_rate: float = 0.1
    n_rounds: int = 50
    l2_penalty: float = 1.0
    max_iterations: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learner_kind not in LEARNER_KINDS:
            raise ValueError(
                f"unknown learner_kind {self.learner_kind!r}, expected one of {LEARNER_KINDS}"
            )
        if self.learner_kind in ("random_forest", "extra_trees") and self.n_trees < 1:
            raise ValueError(f"n_trees must be at least 1, got {self.n_trees}")
        if self.learner_kind == "boosted_trees" and self.n_rounds < 1:
            raise ValueError(f"n_rounds must be at least 1, got {self.n_rounds}")
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must lie in [0, 1], got {self.learning_rate}")
        if self.l2_penalty < 0:
            raise ValueError(f"l2_penalty must be non-negative, got {self.l2_penalty}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be at least 1, got {self.min_samples_leaf}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError(f"max_depth must be at least 1 or None, got {self.max_depth}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if isinstance(self.max_features, str):
            if self.max_features not in ("sqrt", "all"):
                raise ValueError(
                    f"max_features must be 'sqrt', 'all', or a count, got {self.max_features!r}"
                )
        elif self.max_features < 1:
            raise ValueError(f"max_features count must be at least 1, got {self.max_features}")

    def with_seed(self, seed: int) -> "LearnerConfig":
        return replace(self, seed=seed)


def default_learner_configs(seed: int = 0) -> tuple[LearnerConfig, ...]:
    """Default configs for the four learners, in fixed order."""
    return (
        LearnerConfig("random_forest", seed=seed),
        LearnerConfig("extra_trees", bootstrap=False, seed=seed),
        LearnerConfig("boosted_trees", max_depth=3, max_features="all", seed=seed),
        LearnerConfig("logistic", l2_penalty=1e-4, seed=seed),
    )


def _resolve_max_features(max_features: str | int, d: int) -> int | None:
    if max_features == "all":
        return None
    if max_features == "sqrt":
        return max(1, math.isqrt(d))
    return min(int(max_features), d)


def _check_xy(X: np.ndarray, y: np.ndarray, n_classes: int | None) -> tuple[np.ndarray, np.ndarray, int]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"features must be a non-empty 2-D matrix, got shape {X.shape}")
    if len(y) != X.shape[0]:
        raise ValueError(f"label count {len(y)} does not match {X.shape[0]} rows")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if (y < 0).any() or (y >= n_classes).any():
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    return X, y, n_classes


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    cfg: LearnerConfig,
    row_weights: np.ndarray | None = None,
    n_classes: int | None = None,
) -> Tree:
    """Fit a single CART tree per the config's depth/leaf/feature settings."""
    X, y, n_classes = _check_xy(X, y, n_classes)
    return grow_classification_tree(
        X,
        y,
        n_classes,
        max_depth=cfg.max_depth,
        min_samples_leaf=cfg.min_samples_leaf,
        max_features=_resolve_max_features(cfg.max_features, X.shape[1]),
        rng=make_rng(cfg.seed),
        row_weights=row_weights,
    )


def fit_random_forest(
    X: np.ndarray, y: np.ndarray, cfg: LearnerConfig, n_classes: int | None = None
) -> ForestModel:
    if cfg.learner_kind != "random_forest":
        raise ValueError(f"expected a random_forest config, got {cfg.learner_kind!r}")
    X, y, n_classes = _check_xy(X, y, n_classes)
    return _fit_forest(
        X,
        y,
        n_classes,
        kind="random_forest",
        n_trees=cfg.n_trees,
        max_depth=cfg.max_depth,
        min_samples_leaf=cfg.min_samples_leaf,
        max_features=_resolve_max_features(cfg.max_features, X.shape[1]),
        bootstrap=cfg.bootstrap,
        seed=cfg.seed,
    )


def fit_extra_trees(
    X: np.ndarray, y: np.ndarray, cfg: LearnerConfig, n_classes: int | None = None
) -> ForestModel:
    if cfg.learner_kind != "extra_trees":
        raise ValueError(f"expected an extra_trees config, got {cfg.learner_kind!r}")
    X, y, n_classes = _check_xy(X, y, n_classes)
    return _fit_forest(
        X,
        y,
        n_classes,
        kind="extra_trees",
        n_trees=cfg.n_trees,
        max_depth=cfg.max_depth,
        min_samples_leaf=cfg.min_samples_leaf,
        max_features=_resolve_max_features(cfg.max_features, X.shape[1]),
        bootstrap=False,
        seed=cfg.seed,
    )


def fit_boosted_trees(
    X: np.ndarray, y: np.ndarray, cfg: LearnerConfig, n_classes: int | None = None
) -> BoostedTreesModel:
    if cfg.learner_kind != "boosted_trees":
        raise ValueError(f"expected a boosted_trees config, got {cfg.learner_kind!r}")
    X, y, n_classes = _check_xy(X, y, n_classes)
    return _fit_boosted(
        X,
        y,
        n_classes,
        n_rounds=cfg.n_rounds,
        learning_rate=cfg.learning_rate,
        max_depth=cfg.max_depth,
        min_samples_leaf=cfg.min_samples_leaf,
        max_features=_resolve_max_features(cfg.max_features, X.shape[1]),
        l2_penalty=cfg.l2_penalty,
        seed=cfg.seed,
    )


def fit_logistic(
    X: np.ndarray, y: np.ndarray, cfg: LearnerConfig, n_classes: int | None = None
) -> LogisticModel:
    if cfg.learner_kind != "logistic":
        raise ValueError(f"expected a logistic config, got {cfg.learner_kind!r}")
    X, y, n_classes = _check_xy(X, y, n_classes)
    return _fit_logistic(
        X, y, n_classes, l2_penalty=cfg.l2_penalty, max_iterations=cfg.max_iterations
    )


_FITTERS = {
    "random_forest": fit_random_forest,
    "extra_trees": fit_extra_trees,
    "boosted_trees": fit_boosted_trees,
    "logistic": fit_logistic,
}


def fit_learner(
    X: np.ndarray, y: np.ndarray, cfg: LearnerConfig, n_classes: int | None = None
) -> FittedLearner:
    """Fit whichever learner the config names."""
    return _FITTERS[cfg.learner_kind](X, y, cfg, n_classes=n_classes)


def predict_proba(model: FittedLearner, X: np.ndarray) -> np.ndarray:
    """Class probabilities from any fitted learner, with dimension checks."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {X.shape}")
    if X.shape[1] != model.n_features_in:
        raise ValueError(
            f"dimension mismatch: model expects {model.n_features_in} features, "
            f"got {X.shape[1]}"
        )
    return model.predict_proba(X)
