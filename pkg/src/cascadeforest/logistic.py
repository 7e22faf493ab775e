"""Multinomial softmax regression trained by backtracking gradient descent.

The model minimizes mean cross-entropy plus ``l2_penalty * ||W||^2 / 2``
over a K x (d+1) weight matrix (last column is the bias). Features are
standardized internally to zero mean and unit variance; constant columns
stay at zero. Optimization is full-batch gradient descent with an Armijo
backtracking step size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_ARMIJO_C = 1e-4
_GRAD_TOL = 1e-8
_MIN_STEP = 1e-16


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax."""
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_gradient(
    W: np.ndarray, Xb: np.ndarray, y: np.ndarray, l2_penalty: float
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy + L2 ridge and its gradient w.r.t. W.

    ``Xb`` already carries the bias column; ``W`` is K x (d+1).
    """
    n = Xb.shape[0]
    Z = Xb @ W.T
    zmax = Z.max(axis=1)
    log_norm = zmax + np.log(np.exp(Z - zmax[:, None]).sum(axis=1))
    loss = float(np.mean(log_norm - Z[np.arange(n), y]) + 0.5 * l2_penalty * np.sum(W * W))
    P = softmax(Z)
    P[np.arange(n), y] -= 1.0
    grad = P.T @ Xb / n + l2_penalty * W
    return loss, grad


@dataclass
class LogisticModel:
    weights: np.ndarray  # (K, d+1), bias last
    mean: np.ndarray  # (d,) standardization offsets
    scale: np.ndarray  # (d,) standardization divisors (1 for constant columns)
    n_features_in: int
    n_classes: int
    n_iterations: int = 0

    def _design(self, X: np.ndarray) -> np.ndarray:
        Xs = (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
        return np.hstack([Xs, np.ones((Xs.shape[0], 1))])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(self._design(X) @ self.weights.T)


def _fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    l2_penalty: float,
    max_iterations: int,
) -> LogisticModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    Xb = np.hstack([(X - mean) / scale, np.ones((X.shape[0], 1))])

    W = np.zeros((n_classes, Xb.shape[1]))
    loss, grad = loss_and_gradient(W, Xb, y, l2_penalty)
    step = 1.0
    iterations = 0
    for _ in range(max_iterations):
        gnorm2 = float(np.sum(grad * grad))
        if np.sqrt(gnorm2) < _GRAD_TOL:
            break
        step = min(step * 2.0, 1e6)
        while step > _MIN_STEP:
            W_new = W - step * grad
            loss_new, grad_new = loss_and_gradient(W_new, Xb, y, l2_penalty)
            if loss_new <= loss - _ARMIJO_C * step * gnorm2:
                break
            step *= 0.5
        if step <= _MIN_STEP:
            break
        W, loss, grad = W_new, loss_new, grad_new
        iterations += 1
    return LogisticModel(
        weights=W,
        mean=mean,
        scale=scale,
        n_features_in=X.shape[1],
        n_classes=n_classes,
        n_iterations=iterations,
    )
