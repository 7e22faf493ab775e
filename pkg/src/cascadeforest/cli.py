"""Command-line surface: train, predict, evaluate, cv, inspect, convert.

All randomness flows from a single ``--seed`` flag: equal invocations give
byte-identical model files and prediction CSVs. Config precedence is
command-line flags over config-file keys over built-in defaults; the config
file is a flat ``key=value`` format with learner-scoped prefixes, e.g.::

    k_folds=5
    max_layers=10
    boosted.learning_rate=0.1
    random_forest.n_trees=200
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .cascade import CascadeConfig, predict_cascade
from .dataset import (
    SplitSpec,
    encode_labels,
    load_feature_ids,
    load_features,
    write_features,
)
from .errors import CascadeForestError
from .evaluation import outer_cross_validate, run_experiment, summarize_reports
from .learners import LEARNER_KINDS, LearnerConfig, default_learner_configs
from .model_io import load_model, save_model

_LEARNER_ALIASES = {kind: kind for kind in LEARNER_KINDS}
_LEARNER_ALIASES["boosted"] = "boosted_trees"

_CASCADE_KEYS = ("k_folds", "max_layers", "patience", "improvement_epsilon", "seed")
_LEARNER_FIELDS = {f.name: f for f in fields(LearnerConfig)}


def _parse_value(text: str):
    low = text.strip()
    if low.lower() in ("none", "null"):
        return None
    if low.lower() == "true":
        return True
    if low.lower() == "false":
        return False
    try:
        return int(low)
    except ValueError:
        pass
    try:
        return float(low)
    except ValueError:
        pass
    return low


def parse_config_file(path: str | Path) -> dict:
    """Flat key=value config; '#' starts a comment; blank lines ignored."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = _parse_value(value)
    return values


def build_configs(args: argparse.Namespace) -> tuple[CascadeConfig, SplitSpec]:
    """Merge defaults, config file, and flags into the effective configs."""
    cascade_kwargs = {"k_folds": 5, "max_layers": 10, "patience": 1,
                      "improvement_epsilon": 0.0, "seed": 0}
    test_fraction = 0.1
    learner_overrides: dict[str, dict] = {kind: {} for kind in LEARNER_KINDS}

    file_values = parse_config_file(args.config) if getattr(args, "config", None) else {}
    for key, value in file_values.items():
        if key in _CASCADE_KEYS:
            cascade_kwargs[key] = value
        elif key == "test_fraction":
            test_fraction = value
        elif "." in key:
            prefix, _, name = key.partition(".")
            kind = _LEARNER_ALIASES.get(prefix)
            if kind is None:
                raise ValueError(f"unknown learner prefix {prefix!r} in config key {key!r}")
            if name not in _LEARNER_FIELDS or name == "learner_kind":
                raise ValueError(f"unknown learner field {name!r} in config key {key!r}")
            learner_overrides[kind][name] = value
        else:
            raise ValueError(f"unknown config key {key!r}")

    for key in _CASCADE_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            cascade_kwargs[key] = flag
    if getattr(args, "test_fraction", None) is not None:
        test_fraction = args.test_fraction

    seed = int(cascade_kwargs["seed"])
    learners = tuple(
        replace(base, **learner_overrides[base.learner_kind])
        for base in default_learner_configs(seed)
    )
    cfg = CascadeConfig(learner_configs=learners, **cascade_kwargs)
    return cfg, SplitSpec(test_fraction=float(test_fraction), seed=seed)


def _require(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what} not found: {p}")
    return p


def _float_repr(v: float) -> str:
    return repr(float(v))


def cmd_train(args: argparse.Namespace) -> int:
    from .cascade import fit_cascade  # local import keeps startup light

    cfg, _ = build_configs(args)
    features_path = _require(args.features, "features file")
    X, raw_labels = load_features(features_path)
    if raw_labels is None:
        raise CascadeForestError(f"labels required: {features_path} has no label column")
    y, mapping = encode_labels(raw_labels)

    def on_layer(idx: int, acc: float) -> None:
        print(f"layer {idx}: oof accuracy {acc * 100:.4f}%")

    model = fit_cascade(
        X, y, cfg,
        n_classes=len(mapping),
        label_mapping=mapping,
        threads=args.threads,
        on_layer=on_layer,
    )
    save_model(model, args.out)
    print(f"model written to {args.out} "
          f"({len(model.layers)} layers, best layer {model.best_layer_index})")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(_require(args.model, "model file"))
    features_path = _require(args.features, "features file")
    X, _ = load_features(features_path)
    ids = load_feature_ids(features_path)
    proba = predict_cascade(model, X)
    dense = np.argmax(proba, axis=1)
    labels = model.label_mapping[dense]
    k = proba.shape[1]
    with open(args.out, "w", newline="") as fh:
        fh.write("id,predicted_label," + ",".join(f"p{c}" for c in range(k)) + "\n")
        for i in range(len(ids)):
            probs = ",".join(_float_repr(v) for v in proba[i])
            fh.write(f"{ids[i]},{int(labels[i])},{probs}\n")
    print(f"predictions for {len(ids)} rows written to {args.out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg, split = build_configs(args)
    report = run_experiment(
        _require(args.features, "features file"), cfg, split,
        threads=args.threads,
        on_layer=lambda idx, acc: print(f"layer {idx}: oof accuracy {acc * 100:.4f}%"),
    )
    for line in report.summary_lines():
        print(line)
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n")
        print(f"report written to {args.out}")
    else:
        print(report.to_json())
    return 0


def cmd_cv(args: argparse.Namespace) -> int:
    cfg, split = build_configs(args)
    reports = outer_cross_validate(
        _require(args.features, "features file"),
        cfg,
        k_outer=args.outer_folds,
        seed=split.seed,
        threads=args.threads,
    )
    for f, report in enumerate(reports):
        print(f"fold {f}: test accuracy {report.test_accuracy * 100:.4f}%")
    summary = summarize_reports(reports)
    print(
        f"mean test accuracy {summary['mean_test_accuracy'] * 100:.4f}% "
        f"+/- {summary['std_test_accuracy'] * 100:.4f}% over {summary['n_folds']} folds"
    )
    if args.out:
        import json

        payload = {"summary": summary, "folds": [r.__dict__ for r in reports]}
        Path(args.out).write_text(json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n")
        print(f"report written to {args.out}")
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    model = load_model(_require(args.model, "model file"))
    print(f"model: {args.model}")
    print(f"base feature dimension: {model.base_dim}")
    print(f"classes: {model.n_classes} (labels {model.label_mapping.tolist()})")
    print(f"layers: {len(model.layers)}, best layer {model.best_layer_index}")
    for i, layer in enumerate(model.layers):
        marker = " *" if i == model.best_layer_index else ""
        print(
            f"  layer {i}: input dim {layer.input_dim}, "
            f"oof accuracy {layer.layer_accuracy * 100:.4f}%{marker}"
        )
    print(f"k folds: {model.config.k_folds}, seed: {model.config.seed}")
    return 0


def cmd_convert(args: argparse.Namespace) -> int:
    src = _require(args.features, "source file")
    X, labels = load_features(src)
    ids = load_feature_ids(src) if args.to == "csv" else None
    write_features(args.out, X, labels, fmt=args.to, ids=ids)
    print(f"wrote {args.to} file {args.out} ({X.shape[0]} rows, {X.shape[1]} columns)")
    return 0


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, default=None, help="master random seed (default 0)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--test-fraction", dest="test_fraction", type=float, default=None)
    p.add_argument("--folds", dest="k_folds", type=int, default=None,
                   help="cascade-internal out-of-fold count")
    p.add_argument("--max-layers", dest="max_layers", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascadeforest",
        description="Cascade deep-forest classifier over fixed-dimension feature vectors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a cascade on a labeled feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="model output path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write per-row labels and probabilities")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="prediction CSV path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="stratified split, train, report accuracies")
    p.add_argument("--features", required=True)
    p.add_argument("--out", help="write machine-readable report JSON here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cv", help="outer stratified cross-validation")
    p.add_argument("--features", required=True)
    p.add_argument("--out", help="write machine-readable report JSON here")
    p.add_argument("--outer-folds", dest="outer_folds", type=int, default=5)
    _add_config_flags(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("inspect", help="print model metadata")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("convert", help="convert between the CSV and binary formats")
    p.add_argument("--features", required=True, help="source file (format sniffed)")
    p.add_argument("--out", required=True)
    p.add_argument("--to", required=True, choices=("csv", "binary"))
    p.set_defaults(func=cmd_convert)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CascadeForestError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
