"""Synthetic multi-label data with linearly separable labels."""

from __future__ import annotations

import numpy as np

from .dataset import Dataset


def make_hyperplane_dataset(n=400, d=10, L=4, margin=0.1, offset=0.3, seed=0):
    """Uniform features in [-1, 1]^d; label j is ``sign(w_j . x + b_j)``.

    Each ``w_j`` is a random unit vector and ``b_j`` is uniform in
    ``[-offset, offset]``. Points closer than ``margin`` to any hyperplane
    are rejected, so every label is linearly separable with that margin.
    """
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((L, d))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    b = rng.uniform(-offset, offset, L)
    rows = []
    while len(rows) < n:
        batch = rng.uniform(-1.0, 1.0, (max(64, 2 * (n - len(rows))), d))
        keep = np.all(np.abs(batch @ W.T + b) >= margin, axis=1)
        rows.extend(batch[keep])
    X = np.asarray(rows[:n])
    Y = (X @ W.T + b > 0).astype(np.uint8)
    return Dataset(X, Y, name=f"hyperplanes_n{n}_d{d}_L{L}"), W, b
