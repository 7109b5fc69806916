"""Deterministic train/test index splitting."""

from __future__ import annotations

import warnings

import numpy as np


def train_test_split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Split indices 0..n-1 into disjoint train/test sets.

    |train| = round(fraction * n), guarded so neither side is empty.  The
    conventional fraction is 0.75..0.80; anything else is allowed but
    warned about.
    """
    if n < 2:
        raise ValueError("cannot split fewer than 2 rows")
    if not 0 < fraction < 1:
        raise ValueError("fraction must be in (0, 1)")
    if not 0.75 <= fraction <= 0.80:
        warnings.warn(
            f"train fraction {fraction} outside the conventional 0.75-0.80 band",
            stacklevel=2,
        )
    n_train = int(round(fraction * n))
    n_train = min(max(n_train, 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])
