"""Feature-vector dataset handling: file formats, validation, splits, folds.

Two interchange formats carry ``n x d`` feature matrices with optional
integer class labels:

* CSV with header ``id,f0,f1,...,f{d-1}[,label]``. The ``id`` column is an
  opaque string, features are decimal floats, the optional ``label`` column
  holds non-negative integers.
* Binary (magic ``GCFV``): version byte 0x01, u32 LE n_rows, u32 LE n_cols,
  u8 has_labels flag, then n_rows*n_cols IEEE-754 binary32 LE features in
  row-major order, then (iff has_labels) n_rows u16 LE labels.

Features are held as float64 internally; the binary format stores binary32,
so a binary round-trip is bit-exact for values already representable in
binary32. Row numbers in error messages are 1-based over data rows.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError

FEATURE_MAGIC = b"GCFV"
FEATURE_VERSION = 1

_HEADER_STRUCT = struct.Struct("<4sBIIB")


@dataclass(frozen=True)
class SplitSpec:
    """Parameters of a seeded stratified train/test split."""

    test_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.test_fraction < 1.0:
            raise ValueError(
                f"test_fraction must lie in [0, 1), got {self.test_fraction}"
            )


@dataclass(frozen=True)
class FoldAssignment:
    """Stratified partition of rows 0..n-1 into k disjoint folds."""

    fold_of: np.ndarray  # (n,) int64, values in {0..k-1}
    k: int

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(
                f"k must be at least 2, got {self.k} "
                "(a single fold leaves no out-of-fold data)"
            )

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def validate_features(X: np.ndarray) -> np.ndarray:
    """Check matrix shape and finiteness; returns X as float64."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataFormatError(f"feature matrix must be 2-D, got shape {X.shape}")
    n, d = X.shape
    if n < 1 or d < 1:
        raise DataFormatError(f"feature matrix must be at least 1x1, got {n}x{d}")
    bad = ~np.isfinite(X)
    if bad.any():
        row = int(np.flatnonzero(bad.any(axis=1))[0])
        raise DataFormatError(f"non-finite feature value at row {row + 1}")
    return X


def validate_labels(y: np.ndarray, n_rows: int, n_classes: int | None = None) -> np.ndarray:
    """Check label vector length, integrality, and class range."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise DataFormatError(f"label vector must be 1-D, got shape {y.shape}")
    if len(y) != n_rows:
        raise DataFormatError(
            f"label count {len(y)} does not match row count {n_rows}"
        )
    if not np.issubdtype(y.dtype, np.integer):
        raise DataFormatError("labels must be integers")
    y = y.astype(np.int64)
    if (y < 0).any():
        row = int(np.flatnonzero(y < 0)[0])
        raise DataFormatError(f"negative label at row {row + 1}")
    if n_classes is not None and (y >= n_classes).any():
        row = int(np.flatnonzero(y >= n_classes)[0])
        raise DataFormatError(
            f"label {int(y[row])} at row {row + 1} outside class range "
            f"0..{n_classes - 1}"
        )
    return y


def encode_labels(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map arbitrary integer labels onto dense 0..K-1 codes.

    Returns (dense labels, mapping) where mapping[c] is the original value
    of dense class c, sorted ascending.
    """
    raw = np.asarray(raw, dtype=np.int64)
    mapping, dense = np.unique(raw, return_inverse=True)
    return dense.astype(np.int64), mapping


def decode_labels(dense: np.ndarray, mapping: np.ndarray) -> np.ndarray:
    """Inverse of :func:`encode_labels`."""
    return np.asarray(mapping, dtype=np.int64)[np.asarray(dense)]


# ---------------------------------------------------------------------------
# file IO


def _detect_format(path: Path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(4)
    return "binary" if head == FEATURE_MAGIC else "csv"


def load_features(
    path: str | Path, fmt: str | None = None
) -> tuple[np.ndarray, np.ndarray | None]:
    """Load a feature file, returning ``(X, labels-or-None)``.

    ``fmt`` is ``"csv"``, ``"binary"``, or None to sniff the magic bytes.
    """
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"feature file not found: {path}")
    if fmt is None:
        fmt = _detect_format(path)
    if fmt == "csv":
        return _load_csv(path)
    if fmt == "binary":
        return _load_binary(path)
    raise ValueError(f"unknown feature format {fmt!r}")


def load_feature_ids(path: str | Path, fmt: str | None = None) -> list[str]:
    """Row ids of a feature file: CSV id column, or row indices for binary."""
    path = Path(path)
    if fmt is None:
        fmt = _detect_format(path)
    if fmt == "csv":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        return [r[0] for r in rows[1:] if r]
    X, _ = _load_binary(path)
    return [str(i) for i in range(X.shape[0])]


def _parse_csv_header(header: list[str]) -> tuple[int, bool]:
    if not header or header[0] != "id":
        raise DataFormatError("malformed header: first column must be 'id'")
    has_labels = len(header) > 1 and header[-1] == "label"
    n_cols = len(header) - 1 - (1 if has_labels else 0)
    if n_cols < 1:
        raise DataFormatError("malformed header: no feature columns")
    expected = [f"f{i}" for i in range(n_cols)]
    if header[1 : 1 + n_cols] != expected:
        raise DataFormatError(
            "malformed header: feature columns must be named f0..f"
            f"{n_cols - 1} in order"
        )
    return n_cols, has_labels


def _load_csv(path: Path) -> tuple[np.ndarray, np.ndarray | None]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"empty feature file: {path}") from None
        d, has_labels = _parse_csv_header(header)
        width = 1 + d + (1 if has_labels else 0)
        features: list[list[float]] = []
        labels: list[int] = []
        for i, row in enumerate(reader, start=1):
            if len(row) != width:
                raise DataFormatError(
                    f"row {i}: expected {width} columns, got {len(row)}"
                )
            try:
                vals = [float(v) for v in row[1 : 1 + d]]
            except ValueError:
                raise DataFormatError(f"row {i}: unparseable feature value") from None
            if not all(math.isfinite(v) for v in vals):
                raise DataFormatError(f"row {i}: non-finite feature value")
            features.append(vals)
            if has_labels:
                try:
                    lab = int(row[-1])
                except ValueError:
                    raise DataFormatError(f"row {i}: unparseable label") from None
                if lab < 0:
                    raise DataFormatError(f"row {i}: negative label {lab}")
                labels.append(lab)
    if not features:
        raise DataFormatError(f"feature file has no data rows: {path}")
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64) if has_labels else None
    return X, y


def _load_binary(path: Path) -> tuple[np.ndarray, np.ndarray | None]:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER_STRUCT.size:
        raise DataFormatError(f"truncated header in {path}")
    magic, version, n_rows, n_cols, has_labels = _HEADER_STRUCT.unpack_from(blob, 0)
    if magic != FEATURE_MAGIC:
        raise DataFormatError(f"bad magic bytes in {path}: {magic!r}")
    if version != FEATURE_VERSION:
        raise DataFormatError(f"unsupported feature-file version {version}")
    if has_labels not in (0, 1):
        raise DataFormatError(f"malformed header: has_labels flag {has_labels}")
    if n_rows < 1 or n_cols < 1:
        raise DataFormatError(f"malformed header: n_rows={n_rows}, n_cols={n_cols}")
    expected = _HEADER_STRUCT.size + 4 * n_rows * n_cols + (2 * n_rows if has_labels else 0)
    if len(blob) < expected:
        raise DataFormatError(f"truncated feature payload in {path}")
    if len(blob) > expected:
        raise DataFormatError(f"trailing bytes after feature payload in {path}")
    off = _HEADER_STRUCT.size
    X32 = np.frombuffer(blob, dtype="<f4", count=n_rows * n_cols, offset=off)
    X = X32.astype(np.float64).reshape(n_rows, n_cols)
    bad = ~np.isfinite(X)
    if bad.any():
        row = int(np.flatnonzero(bad.any(axis=1))[0])
        raise DataFormatError(f"non-finite feature value at row {row + 1}")
    y = None
    if has_labels:
        off += 4 * n_rows * n_cols
        y = np.frombuffer(blob, dtype="<u2", count=n_rows, offset=off).astype(np.int64)
    return X, y


def write_features(
    path: str | Path,
    X: np.ndarray,
    labels: np.ndarray | None = None,
    fmt: str = "binary",
    ids: list[str] | None = None,
) -> None:
    """Write a feature matrix (and optional labels) in either format."""
    X = validate_features(X)
    if labels is not None:
        labels = validate_labels(labels, X.shape[0])
    if fmt == "binary":
        _write_binary(Path(path), X, labels)
    elif fmt == "csv":
        _write_csv(Path(path), X, labels, ids)
    else:
        raise ValueError(f"unknown feature format {fmt!r}")


def _write_binary(path: Path, X: np.ndarray, labels: np.ndarray | None) -> None:
    with np.errstate(over="ignore"):
        X32 = X.astype("<f4")
    bad = ~np.isfinite(X32.astype(np.float64))
    if bad.any():
        row = int(np.flatnonzero(bad.any(axis=1))[0])
        raise DataFormatError(
            f"row {row + 1}: feature value overflows binary32 range"
        )
    if labels is not None and (labels > 0xFFFF).any():
        row = int(np.flatnonzero(labels > 0xFFFF)[0])
        raise DataFormatError(f"row {row + 1}: label exceeds u16 range")
    n, d = X.shape
    buf = io.BytesIO()
    buf.write(_HEADER_STRUCT.pack(FEATURE_MAGIC, FEATURE_VERSION, n, d,
                                  0 if labels is None else 1))
    buf.write(X32.tobytes(order="C"))
    if labels is not None:
        buf.write(labels.astype("<u2").tobytes())
    Path(path).write_bytes(buf.getvalue())


def _write_csv(
    path: Path, X: np.ndarray, labels: np.ndarray | None, ids: list[str] | None
) -> None:
    n, d = X.shape
    if ids is None:
        ids = [str(i) for i in range(n)]
    elif len(ids) != n:
        raise ValueError(f"got {len(ids)} ids for {n} rows")
    header = ["id"] + [f"f{i}" for i in range(d)] + (["label"] if labels is not None else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(n):
            row = [ids[i]] + ["%.9g" % v for v in X[i]]
            if labels is not None:
                row.append(str(int(labels[i])))
            writer.writerow(row)


# ---------------------------------------------------------------------------
# splits and folds


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(
    X: np.ndarray, y: np.ndarray, spec: SplitSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded stratified train/test split.

    Per class c with count n_c the test set receives
    round-half-away-from-zero(n_c * test_fraction) samples, clamped so at
    least one training sample per class remains. Returns sorted
    (train_indices, test_indices); identical inputs give identical splits.
    """
    X = np.asarray(X)
    y = np.asarray(y, dtype=np.int64)
    if len(y) != X.shape[0]:
        raise ValueError(f"label count {len(y)} does not match {X.shape[0]} rows")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    test_parts = []
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        n_test = _round_half_away(len(idx) * spec.test_fraction)
        n_test = min(n_test, len(idx) - 1)  # keep >= 1 training sample per class
        if n_test > 0:
            test_parts.append(rng.permutation(idx)[:n_test])
    test_idx = (
        np.sort(np.concatenate(test_parts)) if test_parts else np.empty(0, dtype=np.int64)
    )
    mask = np.ones(len(y), dtype=bool)
    mask[test_idx] = False
    return np.flatnonzero(mask), test_idx.astype(np.int64)


def stratified_kfold(y: np.ndarray, k: int, seed: int) -> FoldAssignment:
    """Stratified k-fold assignment; per-class fold sizes differ by <= 1.

    Every class must have at least k samples so each fold sees every class;
    smaller classes are an error rather than a silent bias.
    """
    y = np.asarray(y, dtype=np.int64)
    if k < 2:
        raise ValueError(
            f"k must be at least 2, got {k} (a single fold leaves no out-of-fold data)"
        )
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    fold_of = np.full(len(y), -1, dtype=np.int64)
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        if len(idx) < k:
            raise ValueError(
                f"class {int(c)} has {len(idx)} samples, fewer than k={k} folds"
            )
        perm = rng.permutation(idx)
        fold_of[perm] = np.arange(len(perm)) % k
    return FoldAssignment(fold_of=fold_of, k=k)
