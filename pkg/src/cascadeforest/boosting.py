"""Second-order (Newton) boosted trees for multiclass classification.

Per-class additive scores start at zero. Each round fits K regression
trees to the softmax cross-entropy gradient ``p_c - 1[y=c]`` and Hessian
``p_c (1 - p_c)``; leaf values are ``-G/(H + l2_penalty)`` scaled by the
learning rate. Class probabilities are the softmax of the final scores, so
a zero learning rate leaves every row at the uniform distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .logistic import softmax
from .seeding import make_rng
from .trees import Tree, grow_regression_tree


@dataclass
class BoostedTreesModel:
    rounds: list[list[Tree]]  # n_rounds entries of K trees each
    learning_rate: float
    n_features_in: int
    n_classes: int

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        scores = np.zeros((X.shape[0], self.n_classes))
        for round_trees in self.rounds:
            for c, tree in enumerate(round_trees):
                scores[:, c] += self.learning_rate * tree.predict_value(X)[:, 0]
        return scores

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(self.decision_scores(X))


def _fit_boosted(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_rounds: int,
    learning_rate: float,
    max_depth: int | None,
    min_samples_leaf: int,
    max_features: int | None,
    l2_penalty: float,
    seed: int,
) -> BoostedTreesModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be at least 1, got {n_rounds}")
    if learning_rate < 0:
        raise ValueError(f"learning_rate must be non-negative, got {learning_rate}")
    n = X.shape[0]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    scores = np.zeros((n, n_classes))
    rounds: list[list[Tree]] = []
    for r in range(n_rounds):
        P = softmax(scores)
        grad = P - onehot
        hess = P * (1.0 - P)
        round_trees: list[Tree] = []
        for c in range(n_classes):
            tree = grow_regression_tree(
                X,
                grad[:, c],
                hess[:, c],
                l2_penalty,
                max_depth=max_depth,
                min_samples_leaf=min_samples_leaf,
                max_features=max_features,
                rng=make_rng(seed, r, c),
            )
            round_trees.append(tree)
            scores[:, c] += learning_rate * tree.predict_value(X)[:, 0]
        rounds.append(round_trees)
    return BoostedTreesModel(
        rounds=rounds,
        learning_rate=learning_rate,
        n_features_in=X.shape[1],
        n_classes=n_classes,
    )
