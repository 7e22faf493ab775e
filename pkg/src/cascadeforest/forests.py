"""Bagged tree ensembles: random forest and extremely randomized trees.

Both ensembles average the leaf class distributions of their trees. The
random forest draws a bootstrap resample (with replacement, size n) per
tree, realized as integer weights over the sampled rows; extra trees use
the full sample and random split thresholds. Each tree's random stream is
derived from (config seed, tree index), so fitting is reproducible and
independent of any parallel schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import make_rng
from .trees import Tree, grow_classification_tree


@dataclass
class ForestModel:
    kind: str  # "random_forest" | "extra_trees"
    trees: list[Tree]
    n_features_in: int
    n_classes: int

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        acc = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            acc += tree.predict_value(X)
        return acc / len(self.trees)


def _fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    kind: str,
    n_trees: int,
    max_depth: int | None,
    min_samples_leaf: int,
    max_features: int | None,
    bootstrap: bool,
    seed: int,
) -> ForestModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_trees < 1:
        raise ValueError(f"n_trees must be at least 1, got {n_trees}")
    n = X.shape[0]
    trees = []
    for t in range(n_trees):
        rng = make_rng(seed, t)
        rows = None
        weights = None
        Xt, yt = X, y
        if bootstrap:
            counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
            rows = np.flatnonzero(counts)
            Xt, yt = X[rows], y[rows]
            weights = counts[rows].astype(np.float64)
        trees.append(
            grow_classification_tree(
                Xt,
                yt,
                n_classes,
                max_depth=max_depth,
                min_samples_leaf=min_samples_leaf,
                max_features=max_features,
                rng=rng,
                row_weights=weights,
                random_thresholds=(kind == "extra_trees"),
            )
        )
    return ForestModel(kind=kind, trees=trees, n_features_in=X.shape[1], n_classes=n_classes)
