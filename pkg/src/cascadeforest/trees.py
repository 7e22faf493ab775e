"""Single decision trees: CART-style classification and Newton regression.

Trees are stored as flat node arrays (feature index, threshold, children,
per-node value rows). Split search is vectorized over the candidate
features of a node: each column is sorted once, class or gradient statistics
are accumulated with cumulative sums, and every boundary between distinct
consecutive values is scored.

Determinism rules baked in here and relied on elsewhere:

* candidate thresholds are midpoints of consecutive distinct sorted values;
* equal-score splits resolve to the lowest feature index, then the lowest
  threshold;
* rows with ``x[feature] <= threshold`` go to the left child.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = np.uint32(0xFFFFFFFF)  # sentinel feature index marking leaf nodes


@dataclass
class Tree:
    """Flat-array binary tree; ``value`` rows are meaningful at leaves only."""

    feature: np.ndarray  # (n_nodes,) uint32, LEAF at leaves
    threshold: np.ndarray  # (n_nodes,) float64
    left: np.ndarray  # (n_nodes,) uint32
    right: np.ndarray  # (n_nodes,) uint32
    value: np.ndarray  # (n_nodes, n_values) float64

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        """Route every row to its leaf and return the leaf value rows."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        feature = self.feature.astype(np.int64)
        left = self.left.astype(np.int64)
        right = self.right.astype(np.int64)
        is_leaf = feature == int(LEAF)
        while True:
            active = np.flatnonzero(~is_leaf[node])
            if len(active) == 0:
                break
            cur = node[active]
            go_left = X[active, feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, left[cur], right[cur])
        return self.value[node]


class _TreeArrays:
    """Append-only node storage used while growing a tree."""

    def __init__(self, n_values: int) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []
        self._n_values = n_values

    def add_node(self) -> int:
        self.feature.append(int(LEAF))
        self.threshold.append(0.0)
        self.left.append(0)
        self.right.append(0)
        self.value.append(np.zeros(self._n_values))
        return len(self.feature) - 1

    def set_leaf(self, node: int, value: np.ndarray) -> None:
        self.value[node] = np.asarray(value, dtype=np.float64)

    def set_split(self, node: int, feature: int, threshold: float) -> tuple[int, int]:
        left = self.add_node()
        right = self.add_node()
        self.feature[node] = feature
        self.threshold[node] = threshold
        self.left[node] = left
        self.right[node] = right
        return left, right

    def freeze(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.uint32),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.uint32),
            right=np.asarray(self.right, dtype=np.uint32),
            value=np.vstack(self.value),
        )


def _candidate_features(
    d: int, max_features: int | None, rng: np.random.Generator | None
) -> np.ndarray:
    if max_features is None or max_features >= d:
        return np.arange(d)
    if rng is None:
        raise ValueError("max_features < d requires a random generator")
    return np.sort(rng.choice(d, size=max_features, replace=False))


def _midpoints(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # A midpoint that rounds up to the higher value would send both sides
    # left; fall back to the lower value (rows <= lo still go left).
    mid = (lo + hi) / 2.0
    return np.where(mid == hi, lo, mid)


def _best_sorted_split(
    Xn: np.ndarray,
    score_fn,
    min_samples_leaf: int,
) -> tuple[int, float, float] | None:
    """Shared boundary-scanning split search.

    ``score_fn(order)`` receives the (m, F) per-column sort order and must
    return an (m-1, F) matrix of scores to maximize, one row per boundary
    position. Invalid boundaries are masked here. Returns
    (feature, threshold, score) or None when no boundary is valid.
    """
    m, n_feat = Xn.shape
    if m < 2 * min_samples_leaf or m < 2:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    Xs = np.take_along_axis(Xn, order, axis=0)
    scores = score_fn(order)
    valid = Xs[1:] > Xs[:-1]
    if min_samples_leaf > 1:
        pos = np.arange(1, m)[:, None]
        valid &= (pos >= min_samples_leaf) & (m - pos >= min_samples_leaf)
    scores = np.where(valid, scores, -np.inf)
    flat = np.argmax(scores.ravel(order="F"))  # lowest feature, then threshold
    pos, feat = flat % (m - 1), flat // (m - 1)
    if not np.isfinite(scores[pos, feat]):
        return None
    threshold = float(_midpoints(Xs[pos, feat], Xs[pos + 1, feat]))
    return int(feat), threshold, float(scores[pos, feat])


def _gini_scores(order: np.ndarray, cls: np.ndarray, w: np.ndarray, n_classes: int):
    """Score = sum_c L_c^2 / L + sum_c R_c^2 / R at every boundary.

    Maximizing this is equivalent to minimizing the weighted child Gini
    impurity. With unit weights every intermediate quantity is an exactly
    represented integer, so scores are bit-identical to a direct per-split
    evaluation of the same formula.
    """
    m, n_feat = order.shape
    sw = w[order]
    sy = cls[order]
    cum = np.empty((m, n_feat, n_classes))
    for c in range(n_classes):
        cum[:, :, c] = np.cumsum(sw * (sy == c), axis=0)
    totals = cum[-1, :, :]
    lw = np.cumsum(sw, axis=0)[:-1]
    rw = np.sum(w) - lw
    ssl = np.sum(cum[:-1] ** 2, axis=2)
    ssr = np.sum((totals[None, :, :] - cum[:-1]) ** 2, axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = ssl / lw + ssr / rw
    scores[~np.isfinite(scores)] = -np.inf
    return scores


def _newton_scores(order: np.ndarray, g: np.ndarray, h: np.ndarray, l2: float):
    """XGBoost-style split gain from gradient/Hessian sums at every boundary."""
    gl = np.cumsum(g[order], axis=0)
    hl = np.cumsum(h[order], axis=0)
    g_tot, h_tot = gl[-1, :], hl[-1, :]
    gl, hl = gl[:-1], hl[:-1]
    gr = g_tot[None, :] - gl
    hr = h_tot[None, :] - hl
    parent = g_tot**2 / (h_tot + l2)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = 0.5 * (gl**2 / (hl + l2) + gr**2 / (hr + l2) - parent[None, :])
    scores[~np.isfinite(scores)] = -np.inf
    return scores


def grow_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int | None = None,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    row_weights: np.ndarray | None = None,
    random_thresholds: bool = False,
) -> Tree:
    """Grow a CART-style tree by recursive best-Gini splitting.

    Impure nodes split whenever any valid boundary exists (including
    zero-gain boundaries, which parity problems such as XOR require).
    With ``random_thresholds`` each candidate feature instead gets one
    uniformly drawn threshold between the node's min and max, and the best
    scoring candidate is kept (extremely randomized variant).

    ``row_weights`` (non-negative, not all zero) weight the class counts;
    ``min_samples_leaf`` always counts rows, not weight.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot fit a tree on an empty dataset")
    if len(y) != n:
        raise ValueError(f"label count {len(y)} does not match {n} rows")
    if row_weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(row_weights, dtype=np.float64)
        if (w < 0).any() or not (w > 0).any():
            raise ValueError("row weights must be non-negative and not all zero")

    arrays = _TreeArrays(n_classes)
    root = arrays.add_node()
    stack = [(np.arange(n), 0, root)]
    while stack:
        rows, depth, node = stack.pop()
        cls = y[rows]
        wn = w[rows]
        counts = np.bincount(cls, weights=wn, minlength=n_classes)
        total = counts.sum()
        if total <= 0:
            counts = np.bincount(cls, minlength=n_classes).astype(np.float64)
            total = counts.sum()
        pure = np.count_nonzero(counts) <= 1
        depth_ok = max_depth is None or depth < max_depth
        split = None
        if not pure and depth_ok and len(rows) >= 2 * min_samples_leaf:
            feats = _candidate_features(d, max_features, rng)
            Xn = X[np.ix_(rows, feats)]
            if random_thresholds:
                found = _random_threshold_split(
                    Xn, cls, wn, n_classes, rng, min_samples_leaf
                )
            else:
                found = _best_sorted_split(
                    Xn,
                    lambda order: _gini_scores(order, cls, wn, n_classes),
                    min_samples_leaf,
                )
            if found is not None:
                split = (int(feats[found[0]]), found[1])
        if split is None:
            arrays.set_leaf(node, counts / total)
            continue
        feat, threshold = split
        left_id, right_id = arrays.set_split(node, feat, threshold)
        go_left = X[rows, feat] <= threshold
        stack.append((rows[~go_left], depth + 1, right_id))
        stack.append((rows[go_left], depth + 1, left_id))
    return arrays.freeze()


def _random_threshold_split(
    Xn: np.ndarray,
    cls: np.ndarray,
    wn: np.ndarray,
    n_classes: int,
    rng: np.random.Generator | None,
    min_samples_leaf: int,
) -> tuple[int, float] | None:
    """One uniform threshold per candidate feature; best score wins."""
    if rng is None:
        raise ValueError("random thresholds require a random generator")
    m, n_feat = Xn.shape
    lo = Xn.min(axis=0)
    hi = Xn.max(axis=0)
    thresholds = rng.uniform(lo, hi)
    left_mask = Xn <= thresholds[None, :]
    n_left = left_mask.sum(axis=0)
    valid = (hi > lo) & (n_left >= min_samples_leaf) & (m - n_left >= min_samples_leaf)
    if not valid.any():
        return None
    w1h = np.zeros((m, n_classes))
    w1h[np.arange(m), cls] = wn
    lcounts = left_mask.T.astype(np.float64) @ w1h  # (F, K)
    totals = w1h.sum(axis=0)
    rcounts = totals[None, :] - lcounts
    lw = lcounts.sum(axis=1)
    rw = rcounts.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.sum(lcounts**2, axis=1) / lw + np.sum(rcounts**2, axis=1) / rw
    scores[~valid | ~np.isfinite(scores)] = -np.inf
    best = int(np.argmax(scores))
    if not np.isfinite(scores[best]):
        return None
    return best, float(thresholds[best])


def grow_regression_tree(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    l2_penalty: float,
    max_depth: int | None = 3,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """Grow a Newton-step regression tree on gradient/Hessian statistics.

    Leaf value is ``-G / (H + l2_penalty)``; a node splits only when the
    best boundary has strictly positive gain.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot fit a tree on an empty dataset")
    arrays = _TreeArrays(1)
    root = arrays.add_node()
    stack = [(np.arange(n), 0, root)]
    while stack:
        rows, depth, node = stack.pop()
        g = grad[rows]
        h = hess[rows]
        found = None
        depth_ok = max_depth is None or depth < max_depth
        if depth_ok and len(rows) >= 2 * min_samples_leaf:
            feats = _candidate_features(d, max_features, rng)
            found = _best_sorted_split(
                X[np.ix_(rows, feats)],
                lambda order: _newton_scores(order, g, h, l2_penalty),
                min_samples_leaf,
            )
        if found is not None and found[2] > 0.0:
            feat, threshold = int(feats[found[0]]), found[1]
            go_left = X[rows, feat] <= threshold
            left_id, right_id = arrays.set_split(node, feat, threshold)
            stack.append((rows[~go_left], depth + 1, right_id))
            stack.append((rows[go_left], depth + 1, left_id))
            continue
        denom = h.sum() + l2_penalty
        value = 0.0 if denom == 0 else -g.sum() / denom
        arrays.set_leaf(node, np.array([value]))
    return arrays.freeze()
