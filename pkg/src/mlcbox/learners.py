"""Binary base learners with scores calibrated to [0, 1].

Three learners are available: ``ridge`` (closed form, also usable as a
multi-target regressor), ``linear_svm`` (L2-regularised squared-hinge SVM
trained by dual coordinate descent) and ``knn`` (brute-force neighbour
vote). :func:`fit_binary` and :func:`fit_ovr` are what strategies call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import expit

from ._util import ConfigError, dense, rowdot, sq_distances

__all__ = [
    "BinaryLearnerSpec",
    "LinearModel",
    "ConstantModel",
    "KnnModel",
    "OvrModel",
    "ridge_fit",
    "svm_dcd_fit",
    "svm_primal_objective",
    "knn_score",
    "fit_binary",
    "fit_ovr",
    "CONSTANT_LOW",
    "CONSTANT_HIGH",
]

# score emitted for a label that is constant 0 / constant 1 in its training data
CONSTANT_LOW = 0.05
CONSTANT_HIGH = 0.95

LEARNER_PARAMS = {
    "ridge": {"lambda": 1.0},
    "linear_svm": {"C": 1.0, "tol": 1e-4, "maxIter": 1000},
    "knn": {"k": 10},
}


@dataclass(frozen=True)
class BinaryLearnerSpec:
    name: str = "linear_svm"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in LEARNER_PARAMS:
            raise ConfigError(
                f"unknown base learner {self.name!r}; expected one of {sorted(LEARNER_PARAMS)}"
            )
        merged = dict(LEARNER_PARAMS[self.name])
        for key, value in self.params.items():
            if key not in merged:
                raise ConfigError(f"unknown parameter {key!r} for base learner {self.name!r}")
            merged[key] = value
        p = merged
        if self.name == "ridge" and not float(p["lambda"]) >= 0:
            raise ConfigError("ridge lambda must be >= 0")
        if self.name == "linear_svm":
            if not float(p["C"]) > 0:
                raise ConfigError("linear_svm C must be > 0")
            if not float(p["tol"]) > 0 or int(p["maxIter"]) < 1:
                raise ConfigError("linear_svm needs tol > 0 and maxIter >= 1")
        if self.name == "knn" and int(p["k"]) < 1:
            raise ConfigError("knn k must be >= 1")
        object.__setattr__(self, "params", merged)

    @property
    def regression_capable(self):
        return self.name == "ridge"


class ConstantModel:
    """Emits the same score vector for every input row."""

    def __init__(self, value):
        self.value = np.atleast_1d(np.asarray(value, dtype=np.float64))

    def decision(self, X):
        n = X.shape[0]
        out = np.broadcast_to(self.value, (n, self.value.size)).copy()
        return out[:, 0] if self.value.size == 1 else out

    scores = decision


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: np.ndarray | float
    link: str = "clip"
    info: dict = field(default_factory=dict)

    def decision(self, X):
        return rowdot(X, self.weights) + self.bias

    def scores(self, X):
        z = self.decision(X)
        if self.link == "logistic":
            return expit(z)
        return np.clip(z, 0.0, 1.0)


def ridge_fit(X, y, lam=1.0, fit_bias=True):
    """Ridge regression through the normal equations with an unregularised bias.

    Solves ``(Xa^T Xa + lam * I0) w = Xa^T y`` where ``Xa`` is ``X`` with a
    column of ones appended and ``I0`` is the identity with a zero in the bias
    slot. ``y`` may be a vector or an ``n x k`` target matrix. With ``lam == 0``
    the system can be singular, so the minimum-norm least-squares solution is
    used instead.
    """
    X = dense(X)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    if n < 1:
        raise ValueError("ridge_fit needs at least one row")
    Xa = np.hstack([X, np.ones((n, 1))]) if fit_bias else X
    if lam == 0:
        sol = np.linalg.lstsq(Xa, y, rcond=None)[0]
    else:
        reg = np.full(Xa.shape[1], float(lam))
        if fit_bias:
            reg[-1] = 0.0
        A = Xa.T @ Xa + np.diag(reg)
        try:
            sol = np.linalg.solve(A, Xa.T @ y)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(A, Xa.T @ y, rcond=None)[0]
    if fit_bias:
        return LinearModel(sol[:d], sol[d], link="clip")
    return LinearModel(sol, np.zeros(sol.shape[1:]) if sol.ndim > 1 else 0.0, link="clip")


@numba.njit(cache=True, nogil=True)
def _splitmix(state):
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    return state, z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True)
def _dcd_l2loss(X, y, C, tol, max_iter, seed):
    n, d = X.shape
    diag = 0.5 / C
    qd = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(d):
            s += X[i, j] * X[i, j]
        qd[i] = s + diag
    alpha = np.zeros(n)
    w = np.zeros(d)
    order = np.arange(n)
    history = np.empty(max_iter)
    state = np.uint64(seed)
    sweeps = 0
    gap = np.inf
    primal = np.inf
    for it in range(max_iter):
        for i in range(n - 1, 0, -1):
            state, r = _splitmix(state)
            k = np.int64(r % np.uint64(i + 1))
            order[i], order[k] = order[k], order[i]
        max_pg = 0.0
        for s in range(n):
            i = order[s]
            wx = 0.0
            for j in range(d):
                wx += w[j] * X[i, j]
            g = y[i] * wx - 1.0 + diag * alpha[i]
            pg = min(g, 0.0) if alpha[i] == 0.0 else g
            if abs(pg) > max_pg:
                max_pg = abs(pg)
            if pg != 0.0:
                old = alpha[i]
                alpha[i] = max(old - g / qd[i], 0.0)
                step = (alpha[i] - old) * y[i]
                for j in range(d):
                    w[j] += step * X[i, j]
        ww = 0.0
        for j in range(d):
            ww += w[j] * w[j]
        aa = 0.0
        asum = 0.0
        hinge = 0.0
        for i in range(n):
            aa += alpha[i] * alpha[i]
            asum += alpha[i]
            wx = 0.0
            for j in range(d):
                wx += w[j] * X[i, j]
            slack = 1.0 - y[i] * wx
            if slack > 0.0:
                hinge += slack * slack
        dual_min = 0.5 * ww + 0.5 * diag * aa - asum
        primal = 0.5 * ww + C * hinge
        history[it] = dual_min
        sweeps = it + 1
        gap = primal + dual_min
        if max_pg < tol and gap <= tol * (1.0 + abs(primal)):
            break
    return w, alpha, history[:sweeps], gap, primal


def svm_primal_objective(w, X, y, C):
    """``0.5 |w|^2 + C sum max(0, 1 - y_i w.x_i)^2`` with ``X`` already bias-augmented."""
    slack = np.maximum(0.0, 1.0 - y * (X @ w))
    return 0.5 * float(w @ w) + C * float(slack @ slack)


def svm_dcd_fit(X, y, C=1.0, tol=1e-4, max_iter=1000, seed=0):
    """L2-regularised L2-loss linear SVM trained in the dual.

    Minimises ``0.5 |w|^2 + C sum max(0, 1 - y_i (w.x_i + b))^2``. The bias
    is an appended constant-1 feature, so it is regularised along with the
    weights. Coordinates are visited in a fresh seeded permutation each
    sweep; training stops once the largest projected-gradient violation is
    below ``tol`` and the duality gap is below ``tol * (1 + |primal|)``.

    Scores are the logistic link of the decision value.
    """
    X = dense(X)
    y = np.asarray(y, dtype=np.float64)
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("svm targets must be -1 or +1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("svm_dcd_fit needs both classes present")
    if C <= 0:
        raise ValueError("C must be positive")
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    w, alpha, history, gap, primal = _dcd_l2loss(
        np.ascontiguousarray(Xa), y, float(C), float(tol), int(max_iter), np.uint64(seed)
    )
    info = {
        "alpha": alpha,
        # minimised dual objective per sweep; non-increasing
        "objective_history": history,
        "sweeps": len(history),
        "duality_gap": float(gap),
        "primal": float(primal),
        "dual": float(-history[-1]),
    }
    return LinearModel(w[:d].copy(), float(w[d]), link="logistic", info=info)


class KnnModel:
    """Stores training rows; scores are neighbour vote fractions."""

    def __init__(self, X, y, k, n_classes=None):
        self.X = dense(X)
        self.y = np.asarray(y)
        n = self.X.shape[0]
        if not 1 <= k <= n:
            raise ValueError(f"knn needs 1 <= k <= n (got k={k}, n={n})")
        self.k = int(k)
        self.n_classes = n_classes

    def neighbours(self, X):
        D = sq_distances(X, self.X)
        # stable sort: equal distances keep the lower training index first
        return np.argsort(D, axis=1, kind="stable")[:, : self.k]

    def scores(self, X):
        nb = self.neighbours(X)
        if self.n_classes is None:
            return self.y[nb].astype(np.float64).sum(axis=1) / self.k
        votes = np.zeros((nb.shape[0], self.n_classes))
        for c in range(self.n_classes):
            votes[:, c] = (self.y[nb] == c).sum(axis=1)
        return votes / self.k


def knn_score(Xtrain, ytrain, k, Xtest):
    return KnnModel(Xtrain, ytrain, k).scores(Xtest)


def fit_binary(spec, X, y, seed=0):
    """Fit one calibrated binary learner on 0/1 targets ``y``.

    A single-class target falls back to a :class:`ConstantModel` scoring
    ``CONSTANT_LOW`` or ``CONSTANT_HIGH``.
    """
    y = np.asarray(y)
    positives = int(y.sum())
    if positives == 0:
        return ConstantModel(CONSTANT_LOW)
    if positives == len(y):
        return ConstantModel(CONSTANT_HIGH)
    p = spec.params
    if spec.name == "ridge":
        return ridge_fit(X, y.astype(np.float64), float(p["lambda"]))
    if spec.name == "linear_svm":
        return svm_dcd_fit(
            X, np.where(y > 0, 1.0, -1.0), float(p["C"]), float(p["tol"]), int(p["maxIter"]), seed
        )
    return KnnModel(X, y.astype(np.float64), min(int(p["k"]), len(y)))


class OvrModel:
    """One-vs-rest multiclass wrapper; ``scores`` returns ``n x c`` class scores."""

    def __init__(self, models, n_classes):
        self.models = models
        self.n_classes = n_classes

    def scores(self, X):
        if isinstance(self.models, KnnModel):
            return self.models.scores(X)
        n = X.shape[0]
        if self.n_classes == 1:
            return np.ones((n, 1))
        out = np.empty((n, self.n_classes))
        for c, m in enumerate(self.models):
            out[:, c] = m.scores(X)
        return out

    def predict(self, X):
        return np.argmax(self.scores(X), axis=1)


def fit_ovr(spec, X, class_ids, n_classes, seed=0, seeds=None):
    """Train ``n_classes`` class-vs-rest learners (kNN votes natively).

    ``seeds`` optionally supplies the per-class learner seed; otherwise
    ``seed`` is used for every class.
    """
    class_ids = np.asarray(class_ids)
    if n_classes < 1:
        raise ValueError("need at least one class")
    if spec.name == "knn":
        k = min(int(spec.params["k"]), len(class_ids))
        return OvrModel(KnnModel(X, class_ids, k, n_classes=n_classes), n_classes)
    if n_classes == 1:
        return OvrModel([], 1)
    models = [
        fit_binary(spec, X, (class_ids == c).astype(np.uint8), seed if seeds is None else seeds[c])
        for c in range(n_classes)
    ]
    return OvrModel(models, n_classes)
