"""Driving the whole pipeline through the command-line interface.

Writes a synthetic labeled dataset, then runs: convert (csv -> binary),
train, inspect, predict, and evaluate, each as a real CLI invocation.
Determinism: re-training with the same seed gives a byte-identical model.
Run:  python3 demos/05_command_line.py
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from cascadeforest import write_features

workdir = Path(tempfile.mkdtemp(prefix="cascadeforest_demo_"))
rng = np.random.default_rng(5)
X = np.vstack([c + rng.normal(size=(40, 8)) for c in 8.0 * np.eye(8)[:3]])
y = np.repeat(np.arange(3), 40)
csv = workdir / "data.csv"
write_features(csv, X, y, fmt="csv")

config = workdir / "run.cfg"
config.write_text(
    "# shrink the learners so the demo is quick\n"
    "random_forest.n_trees=20\n"
    "extra_trees.n_trees=20\n"
    "boosted.n_rounds=10\n"
    "logistic.max_iterations=60\n"
)


def cli(*args):
    cmd = [sys.executable, "-m", "cascadeforest.cli", *args]
    print(f"\n$ cascadeforest {' '.join(args)}")
    out = subprocess.run(cmd, capture_output=True, text=True)
    print(out.stdout.rstrip() or out.stderr.rstrip())
    assert out.returncode == 0, out.stderr
    return out


binary = workdir / "data.gcfv"
model_a = workdir / "model_a.gcfm"
model_b = workdir / "model_b.gcfm"
preds = workdir / "predictions.csv"

cli("convert", "--features", str(csv), "--out", str(binary), "--to", "binary")
cli("train", "--features", str(binary), "--out", str(model_a),
    "--seed", "9", "--folds", "3", "--max-layers", "3", "--config", str(config))
cli("inspect", "--model", str(model_a))
cli("predict", "--model", str(model_a), "--features", str(binary), "--out", str(preds))
print("\nfirst prediction rows:")
print("\n".join(preds.read_text().splitlines()[:4]))

cli("train", "--features", str(binary), "--out", str(model_b),
    "--seed", "9", "--folds", "3", "--max-layers", "3", "--config", str(config))
identical = model_a.read_bytes() == model_b.read_bytes()
print(f"\nsame seed twice -> byte-identical model files: {identical}")

cli("evaluate", "--features", str(binary), "--seed", "9", "--folds", "3",
    "--max-layers", "2", "--test-fraction", "0.2", "--config", str(config),
    "--out", str(workdir / "report.json"))
print(f"\nartifacts in {workdir}")
