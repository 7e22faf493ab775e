"""The evaluation harness: stratified split protocol and outer CV.

Runs the standard protocol on synthetic data: hold out a stratified
0.1 test fraction, train the cascade with 5-fold out-of-fold stacking,
report train/test accuracy plus the confusion matrix, then cross-check
with an outer 5-fold cross-validation.
Run:  python3 demos/04_evaluation_protocol.py  (takes a minute or two)
"""

import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from cascadeforest import (
    CascadeConfig,
    SplitSpec,
    default_learner_configs,
    outer_cross_validate,
    run_experiment,
    summarize_reports,
    write_features,
)

rng = np.random.default_rng(42)

# 7 classes, 32 features, centers pairwise ~6 std apart: hard enough that
# accuracy is informative, easy enough to stay in the high-90s
centers = rng.normal(size=(7, 32))
dists = np.sqrt(((centers[:, None] - centers[None]) ** 2).sum(-1))
np.fill_diagonal(dists, np.inf)
centers *= 6.0 / dists.min()
X = np.vstack([c + rng.normal(size=(100, 32)) for c in centers])
y = np.repeat(np.arange(7), 100)

dataset = Path(tempfile.mkdtemp(prefix="cascadeforest_demo_")) / "blobs.gcfv"
write_features(dataset, X, y, fmt="binary")
print(f"dataset: {dataset} ({X.shape[0]} rows, {X.shape[1]} features, 7 classes)\n")

configs = tuple(replace(c, n_trees=40, n_rounds=20, max_iterations=80)
                for c in default_learner_configs(42))
cfg = CascadeConfig(k_folds=5, learner_configs=configs, max_layers=4, seed=42)

print("=== single stratified split (test fraction 0.1) ===")
report = run_experiment(dataset, cfg, SplitSpec(test_fraction=0.1, seed=42),
                        on_layer=lambda i, a: print(f"  layer {i}: oof {a:.4f}"))
for line in report.summary_lines():
    print(line)
print("test confusion matrix (rows = true class):")
print(np.array(report.confusion))

print("\n=== outer 2-fold cross-validation (refit per fold) ===")
reports = outer_cross_validate(dataset, cfg, k_outer=2, seed=42)
for f, rep in enumerate(reports):
    print(f"  fold {f}: test accuracy {rep.test_accuracy:.4f}")
summary = summarize_reports(reports)
print(f"mean {summary['mean_test_accuracy']:.4f} "
      f"+/- {summary['std_test_accuracy']:.4f} over {summary['n_folds']} folds")
