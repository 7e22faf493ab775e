"""Shared test fixtures: synthetic datasets and fast learner configs."""

from dataclasses import replace

import numpy as np

from cascadeforest import CascadeConfig, default_learner_configs


def gaussian_blobs(n_per_class, n_classes, d, separation, std=1.0, seed=0):
    """Isotropic Gaussian blobs whose centers are pairwise exactly
    ``separation`` apart (scaled one-hot corners require n_classes <= d)."""
    assert n_classes <= d
    rng = np.random.default_rng(seed)
    scale = separation / np.sqrt(2.0)
    X = np.vstack(
        [scale * np.eye(d)[c] + std * rng.normal(size=(n_per_class, d)) for c in range(n_classes)]
    )
    y = np.repeat(np.arange(n_classes), n_per_class)
    return X, y


def nearest_centroid_accuracy(X, y):
    """Independent separability oracle: classify by closest class mean."""
    classes = np.unique(y)
    centroids = np.vstack([X[y == c].mean(axis=0) for c in classes])
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    pred = classes[np.argmin(d2, axis=1)]
    return float(np.mean(pred == y))


def fast_learner_configs(seed=0, n_trees=10, n_rounds=5, max_iterations=50, **extra):
    """Shrunken learner configs that keep unit tests quick."""
    return tuple(
        replace(c, n_trees=n_trees, n_rounds=n_rounds, max_iterations=max_iterations, **extra)
        for c in default_learner_configs(seed)
    )


def fast_cascade_config(seed=0, k_folds=2, max_layers=2, **kw):
    return CascadeConfig(
        k_folds=k_folds,
        learner_configs=fast_learner_configs(seed),
        max_layers=max_layers,
        seed=seed,
        **kw,
    )
