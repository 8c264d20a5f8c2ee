"""Problem reducers: PCA on features, k-means row partitioning, PLST on labels."""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, svds

from ._util import ConfigError, dense, rowdot, sq_distances

__all__ = [
    "DIM_NAMES",
    "parse_dim",
    "resolve_dim",
    "PcaState",
    "pca_fit",
    "pca_transform",
    "pca_inverse",
    "KmeansState",
    "kmeans_fit",
    "kmeans_assign",
    "PlstState",
    "plst_fit",
    "plst_encode",
    "plst_decode",
]

DIM_NAMES = ("numF", "numL", "n")

# above this size top-k singular vectors come from an iterative solver
DENSE_SVD_LIMIT = 4096


def parse_dim(expr):
    """Parse a dimension expression; returns a callable over a stats mapping.

    Accepted: integer literals, or products/quotients of float constants and
    the names ``numF``, ``numL``, ``n`` (e.g. ``"numF*0.5"``).
    """
    if isinstance(expr, bool):
        raise ConfigError(f"invalid dimension {expr!r}")
    if isinstance(expr, (int, float)):
        value = float(expr)
        return lambda stats: value
    text = str(expr).strip().strip("'\"")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError:
        raise ConfigError(f"unparsable dimension expression {expr!r}") from None

    def build(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            v = float(node.value)
            return lambda s: v
        if isinstance(node, ast.Name) and node.id in DIM_NAMES:
            name = node.id
            return lambda s: float(s[name])
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Mult, ast.Div)):
            left, right = build(node.left), build(node.right)
            if isinstance(node.op, ast.Mult):
                return lambda s: left(s) * right(s)
            return lambda s: left(s) / right(s)
        raise ConfigError(f"unsupported term in dimension expression {expr!r}")

    return build(tree.body)


def resolve_dim(expr, stats, upper=None):
    """Evaluate a dimension expression against dataset statistics.

    The result is floored and clamped to ``[1, upper]``. A value below 1
    before clamping is a configuration error.
    """
    if hasattr(stats, "as_dict"):
        stats = stats.as_dict()
    try:
        value = parse_dim(expr)(stats)
    except ZeroDivisionError:
        raise ConfigError(f"dimension expression {expr!r} divides by zero") from None
    if not math.isfinite(value):
        raise ConfigError(f"dimension expression {expr!r} is not finite")
    k = math.floor(value)
    if k < 1:
        raise ConfigError(f"dimension expression {expr!r} evaluates to {value} < 1")
    if upper is not None:
        k = min(k, int(upper))
    return int(k)


def _fix_signs(V):
    # columns of V: flip so the largest-magnitude entry is positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _top_right_singular(X, mean, k):
    """Top-k right singular vectors and values of ``X - mean`` (row-broadcast)."""
    n, d = X.shape
    if min(n, d) <= DENSE_SVD_LIMIT or k >= min(n, d):
        Xc = dense(X) - mean
        _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
        return Vt[:k].T, s[:k], float(np.sum(Xc * Xc))

    ones = np.ones(n)

    def matvec(v):
        v = np.ravel(v)
        return X @ v - ones * (mean @ v)

    def rmatvec(u):
        u = np.ravel(u)
        return X.T @ u - mean * u.sum()

    op = LinearOperator((n, d), matvec=matvec, rmatvec=rmatvec, dtype=np.float64)
    v0 = np.random.default_rng(0).standard_normal(min(n, d))
    _, s, Vt = svds(op, k=k, v0=v0)
    order = np.argsort(-s, kind="stable")
    if sp.issparse(X):
        sq = X.multiply(X).sum()
    else:
        sq = float(np.sum(X * X))
    total = float(sq - n * (mean @ mean))
    return Vt[order].T, s[order], total


@dataclass(frozen=True)
class PcaState:
    mean: np.ndarray
    components: np.ndarray  # d x k, orthonormal columns
    singular_values: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray

    @property
    def k(self):
        return self.components.shape[1]


def pca_fit(X, k):
    n, d = X.shape
    if not 1 <= k <= min(n, d):
        raise ValueError(f"PCA dimension must satisfy 1 <= k <= min(n, d) = {min(n, d)}, got {k}")
    mean = np.asarray(X.mean(axis=0)).ravel().astype(np.float64)
    V, s, total = _top_right_singular(X, mean, k)
    V = _fix_signs(V)
    var = s ** 2 / (n - 1) if n > 1 else np.zeros_like(s)
    ratio = s ** 2 / total if total > 0 else np.zeros_like(s)
    return PcaState(mean, np.ascontiguousarray(V), s, var, ratio)


def pca_transform(state, X):
    if X.shape[1] != state.mean.size:
        raise ValueError(f"expected {state.mean.size} features, got {X.shape[1]}")
    if sp.issparse(X) and X.shape[1] > DENSE_SVD_LIMIT:
        return np.asarray(X @ state.components) - state.mean @ state.components
    return rowdot(dense(X) - state.mean, state.components)


def pca_inverse(state, Z):
    return np.asarray(Z) @ state.components.T + state.mean


@dataclass(frozen=True)
class KmeansState:
    centroids: np.ndarray
    seed: int
    inertia: float
    labels: np.ndarray
    n_iter: int
    inertia_history: tuple = field(default=())

    @property
    def m(self):
        return self.centroids.shape[0]


def _kmeans_pp(X, m, rng):
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = sq_distances(X, X[chosen])[:, 0]
    for _ in range(1, m):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining points coincide with a centre
            nxt = next(i for i in range(n) if i not in chosen)
        chosen.append(nxt)
        d2 = np.minimum(d2, sq_distances(X, X[[nxt]])[:, 0])
    return X[chosen].copy()


def _repair_empty(X, C, D, assign):
    """Reseed empty clusters on the point farthest from its own centroid.

    Returns the repaired assignment, centroids and per-row distance to the
    assigned centroid.
    """
    m = C.shape[0]
    own = D[np.arange(len(assign)), assign]
    counts = np.bincount(assign, minlength=m)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return assign, C, own
    C = C.copy()
    own = own.copy()
    for c in empty:
        # only steal from clusters that keep at least one member
        i = int(np.argmax(np.where(counts[assign] > 1, own, -np.inf)))
        counts[assign[i]] -= 1
        assign[i] = c
        counts[c] = 1
        C[c] = X[i]
        own[i] = 0.0
    return assign, C, own


def kmeans_fit(X, m, seed=0, max_iter=100, tol=1e-6):
    """Lloyd's k-means with k-means++ seeding.

    Stops when no assignment changes, when the largest centroid move falls
    below ``tol``, or after ``max_iter`` iterations. A cluster that goes
    empty is reseeded with the point farthest from its own centroid.
    """
    X = dense(X)
    n = X.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"k-means needs 1 <= m <= n (got m={m}, n={n})")
    rng = np.random.default_rng(seed)
    C = _kmeans_pp(X, m, rng)
    history = []
    prev = None
    it = 0
    for it in range(1, max_iter + 1):
        D = sq_distances(X, C)
        assign, C, own = _repair_empty(X, C, D, np.argmin(D, axis=1))
        history.append(float(own.sum()))
        if prev is not None and np.array_equal(assign, prev):
            break
        newC = np.vstack([X[assign == c].mean(axis=0) for c in range(m)])
        move = float(np.max(np.sqrt(((newC - C) ** 2).sum(axis=1))))
        C = newC
        prev = assign
        if move < tol:
            break
    D = sq_distances(X, C)
    labels = np.argmin(D, axis=1)
    inertia = float(D[np.arange(n), labels].sum())
    history.append(inertia)
    return KmeansState(C, int(seed), inertia, labels, it, tuple(history))


def kmeans_assign(state, X):
    """Nearest-centroid index per row; ties go to the lower cluster index."""
    if X.shape[1] != state.centroids.shape[1]:
        raise ValueError(f"expected {state.centroids.shape[1]} columns, got {X.shape[1]}")
    return np.argmin(sq_distances(X, state.centroids), axis=1)


@dataclass(frozen=True)
class PlstState:
    label_mean: np.ndarray
    basis: np.ndarray  # L x k, orthonormal columns
    singular_values: np.ndarray

    @property
    def k(self):
        return self.basis.shape[1]


def plst_fit(Y, k):
    """Principal label-space transformation: SVD of the mean-centred labels."""
    Y = np.asarray(Y, dtype=np.float64)
    n, L = Y.shape
    if not 1 <= k <= min(n, L):
        raise ValueError(f"PLST dimension must satisfy 1 <= k <= min(n, L) = {min(n, L)}, got {k}")
    mean = Y.mean(axis=0)
    V, s, _ = _top_right_singular(Y, mean, k)
    return PlstState(mean, np.ascontiguousarray(_fix_signs(V)), s)


def plst_encode(state, Y):
    return rowdot(np.asarray(Y, dtype=np.float64) - state.label_mean, state.basis)


def plst_decode(state, Zhat, clip=True):
    """Map reduced-space predictions back to the label space, clamped to [0, 1]."""
    Zhat = np.asarray(Zhat, dtype=np.float64)
    if Zhat.ndim != 2 or Zhat.shape[1] != state.k:
        raise ValueError(f"expected {state.k} reduced columns, got shape {Zhat.shape}")
    Yhat = rowdot(Zhat, state.basis.T) + state.label_mean
    return np.clip(Yhat, 0.0, 1.0) if clip else Yhat
