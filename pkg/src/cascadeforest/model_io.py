"""Cascade model persistence (magic ``GCFM``).

Layout: magic (4 bytes), version byte 0x01, payload, trailing CRC-32 (u32)
of every payload byte after the version. The payload is a sequence of
length- or count-prefixed sections, all little-endian:

* config echo as canonical JSON (u32 length prefix, sorted keys);
* label mapping (u32 count, i64 values);
* u32 n_classes, u32 base_dim, u32 best_layer_index;
* layer accuracies (u32 count, f64 values);
* layers (u32 count), each: u32 input_dim, f64 accuracy, 4 ensembles of
  (u8 learner kind, u32 fold-model count, fold-model payloads). Trees are
  node arrays (feature u32 with 0xFFFFFFFF marking leaves, threshold f64,
  child indices u32, node values f64); the logistic learner stores its
  standardization vectors and K x (d+1) weight matrix as f64.

Serialization is canonical: identical models produce identical bytes.
Saving writes to a temp file in the target directory and renames, so a
failed save never leaves a partial model at the destination.
"""

from __future__ import annotations

import io
import json
import os
import struct
import zlib
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .boosting import BoostedTreesModel
from .cascade import CascadeConfig, CascadeLayer, CascadeModel
from .errors import ModelFormatError
from .forests import ForestModel
from .learners import LEARNER_KINDS, LearnerConfig
from .logistic import LogisticModel
from .trees import Tree

MODEL_MAGIC = b"GCFM"
MODEL_VERSION = 1

_KIND_IDS = {kind: i for i, kind in enumerate(LEARNER_KINDS)}


def _config_json(cfg: CascadeConfig) -> bytes:
    return json.dumps(asdict(cfg), sort_keys=True, separators=(",", ":")).encode("utf-8")


def _config_from_json(blob: bytes) -> CascadeConfig:
    raw = json.loads(blob.decode("utf-8"))
    learners = tuple(LearnerConfig(**lc) for lc in raw.pop("learner_configs"))
    return CascadeConfig(learner_configs=learners, **raw)


class _Writer:
    def __init__(self) -> None:
        self.buf = io.BytesIO()

    def u8(self, v: int) -> None:
        self.buf.write(struct.pack("<B", v))

    def u32(self, v: int) -> None:
        self.buf.write(struct.pack("<I", v))

    def f64(self, v: float) -> None:
        self.buf.write(struct.pack("<d", v))

    def raw(self, blob: bytes) -> None:
        self.buf.write(blob)

    def array(self, arr: np.ndarray, dtype: str) -> None:
        self.buf.write(np.ascontiguousarray(arr, dtype=dtype).tobytes())

    def getvalue(self) -> bytes:
        return self.buf.getvalue()


class _Reader:
    """Tracks the section being parsed so truncation errors can name it."""

    def __init__(self, blob: bytes) -> None:
        self.blob = blob
        self.off = 0
        self.section = "header"

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.blob):
            raise ModelFormatError(f"truncated model file in section '{self.section}'")
        out = self.blob[self.off : self.off + n]
        self.off += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def array(self, count: int, dtype: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(count * itemsize), dtype=dtype).copy()


def _write_tree(w: _Writer, tree: Tree) -> None:
    n = tree.n_nodes
    w.u32(n)
    w.u32(tree.value.shape[1])
    w.array(tree.feature, "<u4")
    w.array(tree.threshold, "<f8")
    w.array(tree.left, "<u4")
    w.array(tree.right, "<u4")
    w.array(tree.value, "<f8")


def _read_tree(r: _Reader) -> Tree:
    n = r.u32()
    n_values = r.u32()
    return Tree(
        feature=r.array(n, "<u4").astype(np.uint32),
        threshold=r.array(n, "<f8"),
        left=r.array(n, "<u4").astype(np.uint32),
        right=r.array(n, "<u4").astype(np.uint32),
        value=r.array(n * n_values, "<f8").reshape(n, n_values),
    )


def _write_learner(w: _Writer, model) -> None:
    if isinstance(model, ForestModel):
        w.u8(_KIND_IDS[model.kind])
        w.u32(model.n_features_in)
        w.u32(model.n_classes)
        w.u32(len(model.trees))
        for tree in model.trees:
            _write_tree(w, tree)
    elif isinstance(model, BoostedTreesModel):
        w.u8(_KIND_IDS["boosted_trees"])
        w.u32(model.n_features_in)
        w.u32(model.n_classes)
        w.f64(model.learning_rate)
        w.u32(len(model.rounds))
        for round_trees in model.rounds:
            for tree in round_trees:
                _write_tree(w, tree)
    elif isinstance(model, LogisticModel):
        w.u8(_KIND_IDS["logistic"])
        w.u32(model.n_features_in)
        w.u32(model.n_classes)
        w.array(model.mean, "<f8")
        w.array(model.scale, "<f8")
        w.array(model.weights, "<f8")
    else:
        raise ModelFormatError(f"cannot serialize learner of type {type(model).__name__}")


def _read_learner(r: _Reader):
    kind_id = r.u8()
    if kind_id >= len(LEARNER_KINDS):
        raise ModelFormatError(f"unknown learner kind id {kind_id}")
    kind = LEARNER_KINDS[kind_id]
    d = r.u32()
    k = r.u32()
    if kind in ("random_forest", "extra_trees"):
        n_trees = r.u32()
        trees = [_read_tree(r) for _ in range(n_trees)]
        return ForestModel(kind=kind, trees=trees, n_features_in=d, n_classes=k)
    if kind == "boosted_trees":
        learning_rate = r.f64()
        n_rounds = r.u32()
        rounds = [[_read_tree(r) for _ in range(k)] for _ in range(n_rounds)]
        return BoostedTreesModel(
            rounds=rounds, learning_rate=learning_rate, n_features_in=d, n_classes=k
        )
    mean = r.array(d, "<f8")
    scale = r.array(d, "<f8")
    weights = r.array(k * (d + 1), "<f8").reshape(k, d + 1)
    return LogisticModel(weights=weights, mean=mean, scale=scale, n_features_in=d, n_classes=k)


def save_model(model: CascadeModel, path: str | Path) -> None:
    """Serialize the cascade; atomic (temp file + rename), canonical bytes."""
    w = _Writer()
    config_blob = _config_json(model.config)
    w.u32(len(config_blob))
    w.raw(config_blob)
    w.u32(len(model.label_mapping))
    w.array(model.label_mapping, "<i8")
    w.u32(model.n_classes)
    w.u32(model.base_dim)
    w.u32(model.best_layer_index)
    w.u32(len(model.layer_accuracies))
    for acc in model.layer_accuracies:
        w.f64(acc)
    w.u32(len(model.layers))
    for layer in model.layers:
        w.u32(layer.input_dim)
        w.f64(layer.layer_accuracy)
        for models in layer.ensembles:
            w.u32(len(models))
            for m in models:
                _write_learner(w, m)
    payload = w.getvalue()

    blob = io.BytesIO()
    blob.write(MODEL_MAGIC)
    blob.write(struct.pack("<B", MODEL_VERSION))
    blob.write(payload)
    blob.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))

    path = Path(path)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    try:
        tmp.write_bytes(blob.getvalue())
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def load_model(path: str | Path) -> CascadeModel:
    """Load a cascade model, verifying magic, version, and checksum."""
    blob = Path(path).read_bytes()
    if len(blob) < 9:
        raise ModelFormatError(f"model file too short: {path}")
    if blob[:4] != MODEL_MAGIC:
        raise ModelFormatError(f"bad magic bytes in {path}: {blob[:4]!r}")
    version = blob[4]
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    payload = blob[5:-4]
    (crc_stored,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) & 0xFFFFFFFF != crc_stored:
        raise ModelFormatError(f"checksum mismatch in {path}")

    r = _Reader(payload)
    r.section = "config"
    config_len = r.u32()
    config = _config_from_json(r.take(config_len))
    r.section = "label mapping"
    n_labels = r.u32()
    label_mapping = r.array(n_labels, "<i8")
    r.section = "metadata"
    n_classes = r.u32()
    base_dim = r.u32()
    best_layer_index = r.u32()
    r.section = "accuracies"
    n_accs = r.u32()
    accuracies = [r.f64() for _ in range(n_accs)]
    r.section = "layers"
    n_layers = r.u32()
    layers = []
    for i in range(n_layers):
        r.section = f"layer {i}"
        input_dim = r.u32()
        layer_acc = r.f64()
        ensembles = []
        for _ in range(len(LEARNER_KINDS)):
            n_models = r.u32()
            ensembles.append([_read_learner(r) for _ in range(n_models)])
        layers.append(
            CascadeLayer(ensembles=ensembles, layer_accuracy=layer_acc, input_dim=input_dim)
        )
    if r.off != len(payload):
        raise ModelFormatError("trailing bytes after model payload")
    return CascadeModel(
        layers=layers,
        best_layer_index=best_layer_index,
        n_classes=n_classes,
        base_dim=base_dim,
        label_mapping=label_mapping,
        config=config,
        layer_accuracies=accuracies,
    )
