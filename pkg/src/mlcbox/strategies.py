"""Terminal multi-label strategies.

Every strategy is fitted on a dense feature matrix and a 0/1 label matrix
and predicts an ``n x L`` score matrix with entries in [0, 1]. Learner
seeds are derived from the strategy seed and the label (or class, or
pair) they serve, so e.g. a one-label chain and one-label BR train the
same model.
"""

from __future__ import annotations

from math import comb

import numpy as np

from ._util import dense, derive_seed, rowdot
from .learners import CONSTANT_LOW, ConstantModel, fit_binary, fit_ovr, ridge_fit

__all__ = [
    "BinaryRelevance",
    "ClassifierChain",
    "LabelPowerset",
    "RAkEL",
    "PairwiseRanking",
    "RankingSingleLabel",
    "draw_labelsets",
    "br_fit",
    "cc_fit",
    "lp_fit",
    "rakel_fit",
    "rpc_fit",
    "rsl_fit",
]


def _hstack(X, cols):
    return np.hstack([X, np.asarray(cols, dtype=np.float64)]) if cols.shape[1] else X


class BinaryRelevance:
    """One independent learner per label.

    With ``regression=True`` the targets are real-valued (e.g. PLST codes):
    a single multi-target ridge is fitted and raw predictions are returned.
    """

    regression_capable = True

    def __init__(self, base, seed=0, regression=False):
        self.base = base
        self.seed = seed
        self.regression = regression

    def fit(self, X, Y):
        X = dense(X)
        self.L = Y.shape[1]
        if self.regression:
            if not self.base.regression_capable:
                raise ValueError(f"base learner {self.base.name!r} cannot fit real-valued targets")
            self.model = ridge_fit(X, np.asarray(Y, dtype=np.float64), float(self.base.params["lambda"]))
            return self
        self.models = [
            fit_binary(self.base, X, Y[:, j], derive_seed(self.seed, j)) for j in range(self.L)
        ]
        return self

    def predict(self, X):
        X = dense(X)
        if self.regression:
            return self.model.decision(X).reshape(X.shape[0], self.L)
        out = np.empty((X.shape[0], self.L))
        for j, m in enumerate(self.models):
            out[:, j] = m.scores(X)
        return out


class ClassifierChain:
    """Chain of binary learners; link t sees the features plus the previous t-1 labels.

    Training augments with true labels, prediction with hard (>= 0.5)
    decisions of earlier links. ``order=None`` keeps label order; pass
    ``random_order=True`` for a seed-derived permutation.
    """

    regression_capable = False

    def __init__(self, base, seed=0, order=None, random_order=False):
        self.base = base
        self.seed = seed
        self.order = order
        self.random_order = random_order

    def fit(self, X, Y):
        X = dense(X)
        L = Y.shape[1]
        self.L = L
        if self.random_order:
            order = np.random.default_rng(derive_seed(self.seed, "order")).permutation(L)
        elif self.order is None:
            order = np.arange(L)
        else:
            order = np.asarray(self.order, dtype=int)
            if sorted(order.tolist()) != list(range(L)):
                raise ValueError(f"chain order {self.order!r} is not a permutation of {L} labels")
        self.order_ = order
        self.models = []
        for t, j in enumerate(order):
            Xt = _hstack(X, Y[:, order[:t]])
            self.models.append(fit_binary(self.base, Xt, Y[:, j], derive_seed(self.seed, int(j))))
        return self

    def predict(self, X):
        X = dense(X)
        n = X.shape[0]
        scores = np.empty((n, self.L))
        hard = np.empty((n, 0))
        for t, j in enumerate(self.order_):
            s = self.models[t].scores(_hstack(X, hard))
            scores[:, j] = s
            hard = np.hstack([hard, (s >= 0.5).astype(np.float64)[:, None]])
        return scores


class LabelPowerset:
    """Each distinct training labelset becomes one class.

    Only labelsets seen in training can ever be predicted as the argmax.
    """

    regression_capable = False

    def __init__(self, base, seed=0):
        self.base = base
        self.seed = seed

    def fit(self, X, Y):
        X = dense(X)
        self.classes, ids = np.unique(np.asarray(Y, dtype=np.uint8), axis=0, return_inverse=True)
        ids = np.ravel(ids)
        c = len(self.classes)
        seeds = [derive_seed(self.seed, "class", i) for i in range(c)]
        self.model = fit_ovr(self.base, X, ids, c, seeds=seeds)
        return self

    def class_scores(self, X):
        s = self.model.scores(dense(X))
        total = s.sum(axis=1, keepdims=True)
        c = s.shape[1]
        return np.where(total > 0, s / np.where(total > 0, total, 1.0), 1.0 / c)

    def predict(self, X):
        return np.clip(rowdot(self.class_scores(X), self.classes.astype(np.float64)), 0.0, 1.0)

    def predict_labelsets(self, X):
        return self.classes[np.argmax(self.class_scores(X), axis=1)]


def draw_labelsets(L, k, m, seed):
    """Draw ``m`` sorted k-subsets of ``range(L)``.

    Subsets are distinct unless fewer than ``m`` exist. When ``m * k >= L``
    any label left uncovered is swapped into the earliest-drawn subset that
    holds a label covered more than once.
    """
    if not 1 <= k <= L:
        raise ValueError(f"RAkEL needs 1 <= k <= L (got k={k}, L={L})")
    if m < 1:
        raise ValueError("RAkEL needs m >= 1")
    rng = np.random.default_rng(derive_seed(seed, "labelsets"))
    distinct = comb(L, k) >= m
    subsets, seen = [], set()
    while len(subsets) < m:
        s = tuple(sorted(rng.choice(L, size=k, replace=False).tolist()))
        if distinct and s in seen:
            continue
        seen.add(s)
        subsets.append(list(s))

    if m * k >= L:
        counts = np.zeros(L, dtype=int)
        for s in subsets:
            counts[s] += 1
        cursor = 0
        for u in np.flatnonzero(counts == 0):
            for step in range(m):
                idx = (cursor + step) % m
                s = subsets[idx]
                dup = [j for j in s if counts[j] > 1]
                if dup:
                    out = max(dup, key=lambda j: (counts[j], -j))
                    s[s.index(out)] = int(u)
                    s.sort()
                    counts[out] -= 1
                    counts[u] += 1
                    cursor = idx + 1
                    break
    return [tuple(s) for s in subsets]


class RAkEL:
    """Ensemble of label powersets over random k-labelsets; scores are averaged."""

    regression_capable = False

    def __init__(self, base, seed=0, k=3, m=None):
        self.base = base
        self.seed = seed
        self.k = k
        self.m = m

    def fit(self, X, Y):
        X = dense(X)
        L = Y.shape[1]
        self.L = L
        m = self.m if self.m is not None else 2 * L
        self.subsets = draw_labelsets(L, int(self.k), int(m), self.seed)
        self.prior = np.asarray(Y, dtype=np.float64).mean(axis=0)
        self.members = [LabelPowerset(self.base, self.seed).fit(X, Y[:, list(s)]) for s in self.subsets]
        return self

    def predict(self, X):
        X = dense(X)
        n = X.shape[0]
        total = np.zeros((n, self.L))
        count = np.zeros(self.L)
        for s, member in zip(self.subsets, self.members):
            total[:, list(s)] += member.predict(X)
            count[list(s)] += 1
        out = np.broadcast_to(self.prior, (n, self.L)).copy()
        covered = count > 0
        out[:, covered] = total[:, covered] / count[covered]
        return out


class PairwiseRanking:
    """Ranking by pairwise comparison: one learner per label pair, soft votes."""

    regression_capable = False

    def __init__(self, base, seed=0):
        self.base = base
        self.seed = seed

    def fit(self, X, Y):
        X = dense(X)
        L = Y.shape[1]
        if L < 2:
            raise ValueError("pairwise ranking needs at least two labels")
        self.L = L
        self.pairs = {}
        for i in range(L):
            for j in range(i + 1, L):
                rows = np.flatnonzero(Y[:, i] != Y[:, j])
                # no eligible rows, or only one winner seen: nothing to compare
                if rows.size == 0 or np.unique(Y[rows, i]).size < 2:
                    continue
                self.pairs[(i, j)] = fit_binary(
                    self.base, X[rows], Y[rows, i], derive_seed(self.seed, "pair", i, j)
                )
        return self

    def pairwise_confidences(self, X):
        """``{(i, j): conf(i beats j)}`` for i < j; skipped pairs give 0.5."""
        X = dense(X)
        n = X.shape[0]
        out = {}
        for i in range(self.L):
            for j in range(i + 1, self.L):
                model = self.pairs.get((i, j))
                out[(i, j)] = np.full(n, 0.5) if model is None else model.scores(X)
        return out

    def predict(self, X):
        n = X.shape[0]
        votes = np.zeros((n, self.L))
        for (i, j), p in self.pairwise_confidences(X).items():
            votes[:, i] += p
            votes[:, j] += 1.0 - p
        return np.clip(votes / (self.L - 1), 0.0, 1.0)


class RankingSingleLabel:
    """Cross-training reduction to one multiclass problem over labels.

    Each training row is copied once per relevant label with that label as
    its class; rows without labels are dropped.
    """

    regression_capable = False

    def __init__(self, base, seed=0):
        self.base = base
        self.seed = seed

    def fit(self, X, Y):
        X = dense(X)
        L = Y.shape[1]
        self.L = L
        rows, cls = np.nonzero(np.asarray(Y))
        if rows.size == 0:
            self.model = ConstantModel(np.full(L, CONSTANT_LOW))
            return self
        seeds = [derive_seed(self.seed, "class", c) for c in range(L)]
        self.model = fit_ovr(self.base, X[rows], cls, L, seeds=seeds)
        return self

    def predict(self, X):
        X = dense(X)
        s = self.model.scores(X)
        return np.clip(s.reshape(X.shape[0], self.L), 0.0, 1.0)


def br_fit(X, Y, base, seed=0):
    return BinaryRelevance(base, seed).fit(X, Y)


def cc_fit(X, Y, base, order=None, seed=0, random_order=False):
    return ClassifierChain(base, seed, order=order, random_order=random_order).fit(X, Y)


def lp_fit(X, Y, base, seed=0):
    return LabelPowerset(base, seed).fit(X, Y)


def rakel_fit(X, Y, base, k=3, m=None, seed=0):
    return RAkEL(base, seed, k=k, m=m).fit(X, Y)


def rpc_fit(X, Y, base, seed=0):
    return PairwiseRanking(base, seed).fit(X, Y)


def rsl_fit(X, Y, base, seed=0):
    return RankingSingleLabel(base, seed).fit(X, Y)
