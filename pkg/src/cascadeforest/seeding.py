"""Deterministic seed derivation.

Every random stream in the package derives from an integer seed plus a
context tuple (layer, learner, fold, tree, ...), so results are independent
of execution schedule and reproducible across platforms.
"""

from __future__ import annotations

import numpy as np


def derive_seed(*words: int) -> int:
    """Mix an arbitrary tuple of non-negative ints into one 64-bit seed."""
    seq = np.random.SeedSequence([int(w) for w in words])
    return int(seq.generate_state(1, np.uint64)[0])


def make_rng(*words: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(w) for w in words])))
