"""Feature-file handling: the CSV and binary interchange formats.

Builds a small labeled feature matrix, writes it in both formats, reads it
back, and shows the validation errors the loaders raise on bad input.
Run:  python3 demos/01_feature_files.py
"""

import tempfile
from pathlib import Path

import numpy as np

from cascadeforest import DataFormatError, load_features, write_features

workdir = Path(tempfile.mkdtemp(prefix="cascadeforest_demo_"))
print(f"working in {workdir}\n")

# a 6-row, 4-feature matrix with 2 classes
rng = np.random.default_rng(0)
X = rng.normal(size=(6, 4))
y = np.array([0, 0, 0, 1, 1, 1])

# CSV: header is id,f0,...,f{d-1}[,label]
csv_path = workdir / "toy.csv"
write_features(csv_path, X, y, fmt="csv")
print("CSV contents:")
print(csv_path.read_text())

# binary: magic GCFV, binary32 features, u16 labels
bin_path = workdir / "toy.gcfv"
write_features(bin_path, X, y, fmt="binary")
print(f"binary file: {bin_path.stat().st_size} bytes "
      f"(14-byte header + {6 * 4 * 4} feature bytes + {6 * 2} label bytes)")

# loading sniffs the magic bytes, so the format argument is optional
X_csv, y_csv = load_features(csv_path)
X_bin, y_bin = load_features(bin_path)
print("labels round-trip:", np.array_equal(y, y_csv) and np.array_equal(y, y_bin))

# the binary format stores binary32: a round-trip through it is bit-exact
# once values are binary32-representable
X32 = X.astype(np.float32).astype(np.float64)
write_features(bin_path, X32, y, fmt="binary")
X_back, _ = load_features(bin_path)
print("binary round-trip bit-exact:", np.array_equal(X32, X_back))

# loaders reject non-finite values and name the offending row
bad = workdir / "bad.csv"
bad.write_text("id,f0,f1,label\nr0,1.0,2.0,0\nr1,NaN,3.0,1\n")
try:
    load_features(bad)
except DataFormatError as exc:
    print(f"rejected bad file: {exc}")
