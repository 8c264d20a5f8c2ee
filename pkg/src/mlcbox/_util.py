"""Small numeric helpers shared across modules."""

from __future__ import annotations

import hashlib

import numpy as np
import scipy.sparse as sp


class ConfigError(ValueError):
    """Invalid experiment or pipeline configuration."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


def derive_seed(seed, *path):
    """Deterministic 63-bit child seed from a root seed and a node path."""
    key = ":".join([str(int(seed))] + [str(p) for p in path]).encode()
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def dense(X):
    if sp.issparse(X):
        return np.asarray(X.toarray(), dtype=np.float64)
    return np.asarray(X, dtype=np.float64)


def rowdot(X, W):
    """``X @ W`` computed so that each output row depends only on its input row.

    BLAS gemm may round a row differently depending on where it sits in the
    block layout, which breaks exact row-permutation equivariance.
    """
    X = dense(X)
    W = np.asarray(W, dtype=np.float64)
    if W.ndim == 1:
        return np.einsum("ij,j->i", X, W, optimize=False)
    return np.einsum("ij,jk->ik", X, W, optimize=False)


def sq_distances(X, C):
    """Squared Euclidean distances between rows of X (n x d) and C (m x d)."""
    X = dense(X)
    C = np.asarray(C, dtype=np.float64)
    chunk = max(1, (1 << 22) // max(1, C.shape[0] * C.shape[1]))
    out = np.empty((X.shape[0], C.shape[0]))
    for start in range(0, X.shape[0], chunk):
        block = X[start:start + chunk]
        out[start:start + chunk] = ((block[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    return out
