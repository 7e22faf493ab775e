"""The four base learners behind every cascade layer.

Fits a random forest, extra trees, boosted trees, and a softmax-regression
model on the same 3-class problem and compares their class-probability
outputs. Every learner obeys the same contract: fit on (X, y), emit a
row-stochastic probability matrix.
Run:  python3 demos/02_base_learners.py
"""

import numpy as np

from cascadeforest import default_learner_configs, fit_learner, predict_proba

rng = np.random.default_rng(7)

# three Gaussian blobs, moderately separated
centers = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 3.5]])
X = np.vstack([c + rng.normal(size=(60, 2)) for c in centers])
y = np.repeat(np.arange(3), 60)

probe = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 3.5], [2.0, 1.2]])

print(f"training on {X.shape[0]} rows, {X.shape[1]} features, 3 classes\n")
for cfg in default_learner_configs(seed=7):
    model = fit_learner(X, y, cfg, n_classes=3)
    proba = predict_proba(model, probe)
    train_acc = np.mean(np.argmax(predict_proba(model, X), axis=1) == y)
    print(f"{cfg.learner_kind:>14}: train accuracy {train_acc:.3f}")
    for row, p in zip(probe, proba):
        print(f"                probe {row} -> {np.round(p, 3)}")
    assert np.abs(proba.sum(axis=1) - 1).max() < 1e-9  # simplex contract
    print()

print("the last probe point sits between all three blobs, so every learner")
print("spreads its probability mass instead of committing to one class")
