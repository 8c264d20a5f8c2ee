"""Turn score matrices into 0/1 predictions (Scut, Rcut, Pcut)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import ConfigError

__all__ = [
    "ThresholdSpec",
    "SCUT_GRID",
    "apply_scut",
    "apply_rcut",
    "apply_pcut",
    "tune_scut",
    "apply_threshold",
]

SCUT_GRID = np.round(np.arange(1, 20) * 0.05, 2)


@dataclass(frozen=True)
class ThresholdSpec:
    """``type`` is Scut, Rcut or Pcut.

    Scut takes a threshold in [0, 1] or ``"tuned"``; Rcut takes the number
    of labels kept per row; Pcut ignores its parameter.
    """

    type: str = "Scut"
    param: object = 0.5

    def __post_init__(self):
        if self.type not in ("Scut", "Rcut", "Pcut"):
            raise ConfigError(f"unknown threshold type {self.type!r}")
        if self.type == "Scut" and self.param != "tuned":
            try:
                t = float(self.param)
            except (TypeError, ValueError):
                raise ConfigError(f"Scut parameter must be a number or 'tuned', got {self.param!r}") from None
            if not 0.0 <= t <= 1.0:
                raise ConfigError(f"Scut threshold must lie in [0, 1], got {t}")
            object.__setattr__(self, "param", t)
        if self.type == "Rcut":
            k = self.param if self.param is not None else 1
            if isinstance(k, float) and k.is_integer():
                k = int(k)
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise ConfigError(f"Rcut parameter must be an integer >= 1, got {self.param!r}")
            object.__setattr__(self, "param", k)

    @property
    def tuned(self):
        return self.type == "Scut" and self.param == "tuned"


def apply_scut(S, t=0.5):
    """``P[i, j] = S[i, j] >= t`` for a scalar or per-label threshold vector."""
    S = np.asarray(S, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if np.any((t < 0) | (t > 1)):
        raise ValueError("thresholds must lie in [0, 1]")
    return (S >= t).astype(np.uint8)


def apply_rcut(S, k):
    """Mark the ``k`` top-scoring labels of each row; ties go to lower label index."""
    S = np.asarray(S, dtype=np.float64)
    n, L = S.shape
    if not 1 <= k <= L:
        raise ValueError(f"Rcut needs 1 <= k <= L (got k={k}, L={L})")
    top = np.argsort(-S, axis=1, kind="stable")[:, :k]
    P = np.zeros((n, L), dtype=np.uint8)
    np.put_along_axis(P, top, 1, axis=1)
    return P


def apply_pcut(S, priors):
    """Per label j, mark the ``ceil(priors[j] * n)`` highest-scoring rows.

    Ties at the cut go to the lower row index. ``priors`` must come from
    training labels only.
    """
    S = np.asarray(S, dtype=np.float64)
    priors = np.asarray(priors, dtype=np.float64)
    n, L = S.shape
    if priors.shape != (L,) or np.any((priors < 0) | (priors > 1)):
        raise ValueError("priors must be an L-vector in [0, 1]")
    # rounding first keeps e.g. 0.7 * 10 = 7.000000000000001 from becoming 8
    q = np.minimum(np.ceil(np.round(priors * n, 9)), n).astype(int)
    order = np.argsort(-S, axis=0, kind="stable")
    P = np.zeros((n, L), dtype=np.uint8)
    for j in range(L):
        P[order[: q[j], j], j] = 1
    return P


def _label_f1(y, p):
    tp = np.sum(y & p, axis=0)
    denom = y.sum(axis=0) + p.sum(axis=0)
    return np.where(denom == 0, 1.0, 2.0 * tp / np.maximum(denom, 1))


def tune_scut(Y, S, grid=SCUT_GRID):
    """Per-label threshold from ``grid`` maximising label F1; ties pick the smaller t."""
    Y = np.asarray(Y).astype(bool)
    S = np.asarray(S, dtype=np.float64)
    best = np.empty(Y.shape[1])
    best_f1 = np.full(Y.shape[1], -1.0)
    for t in grid:
        f1 = _label_f1(Y, S >= t)
        better = f1 > best_f1
        best[better] = t
        best_f1[better] = f1[better]
    return best


def apply_threshold(spec, S, priors=None, tuned_thresholds=None):
    if spec.type == "Scut":
        t = tuned_thresholds if spec.tuned else spec.param
        if t is None:
            raise ValueError("tuned Scut needs thresholds from tune_scut")
        return apply_scut(S, t)
    if spec.type == "Rcut":
        return apply_rcut(S, min(spec.param, np.shape(S)[1]))
    if priors is None:
        raise ValueError("Pcut needs training label priors")
    return apply_pcut(S, priors)
