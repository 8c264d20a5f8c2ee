"""Multi-label evaluation metrics.

Zero-division conventions (echoed in every report under ``conventions``):

* example F1: a row with no true and no predicted labels scores 1.0
* label F1: a label with no true and no predicted positives scores 1.0;
  micro F1 likewise when nothing is positive anywhere
* ranking loss: rows whose labels are all relevant or all irrelevant are
  excluded; tied (relevant, irrelevant) pairs count 0.5
* one-error and average precision skip rows with no relevant label
* coverage: 0-based rank of the worst-ranked relevant label, a tie counted
  at its worst position; rows with no relevant label contribute 0
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "CONVENTIONS",
    "example_metrics",
    "label_metrics",
    "ranking_metrics",
    "evaluate",
]

CONVENTIONS = {
    "example_f1_empty_row": 1.0,
    "label_f1_zero_division": 1.0,
    "ranking_loss_excludes_trivial_rows": True,
    "ranking_loss_tie_weight": 0.5,
    "one_error_skips_rows_without_relevant": True,
    "average_precision_skips_rows_without_relevant": True,
    "coverage_rank_base": 0,
    "coverage_ties": "pessimistic",
}


def _check(Y, P):
    Y = np.asarray(Y)
    P = np.asarray(P)
    if Y.shape != P.shape or Y.ndim != 2:
        raise ValueError(f"shape mismatch: {Y.shape} vs {P.shape}")
    return Y, P


def example_metrics(Y, P):
    Y, P = _check(Y, P)
    Y = Y.astype(bool)
    P = P.astype(bool)
    n, L = Y.shape
    inter = np.sum(Y & P, axis=1)
    sizes = Y.sum(axis=1) + P.sum(axis=1)
    f1 = np.where(sizes == 0, 1.0, 2.0 * inter / np.maximum(sizes, 1))
    return {
        "hamming_loss": float(np.sum(Y != P) / (n * L)),
        "subset_accuracy": float(np.mean(np.all(Y == P, axis=1))),
        "example_f1": float(np.mean(f1)),
    }


def label_metrics(Y, P):
    Y, P = _check(Y, P)
    Y = Y.astype(bool)
    P = P.astype(bool)
    tp = np.sum(Y & P, axis=0)
    fp = np.sum(~Y & P, axis=0)
    fn = np.sum(Y & ~P, axis=0)
    denom = 2 * tp + fp + fn
    per_label = np.where(denom == 0, 1.0, 2.0 * tp / np.maximum(denom, 1))
    pooled = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = 1.0 if pooled == 0 else 2.0 * tp.sum() / pooled
    return {"macro_f1": float(per_label.mean()), "micro_f1": float(micro)}


def ranking_metrics(Y, S):
    Y, S = _check(Y, S)
    Y = Y.astype(bool)
    S = np.asarray(S, dtype=np.float64)
    n, L = Y.shape
    rloss, oerr, cov, ap = [], [], [], []
    for y, s in zip(Y, S):
        rel = np.flatnonzero(y)
        irr = np.flatnonzero(~y)
        if rel.size == 0:
            cov.append(0.0)
            continue
        # pessimistic rank: labels scored >= s[j], counting j itself (1-based)
        rank = np.sum(s[None, :] >= s[:, None], axis=1)
        cov.append(float(rank[rel].max() - 1))
        oerr.append(0.0 if y[int(np.argmax(s))] else 1.0)
        hits = np.sum(s[rel][None, :] >= s[rel][:, None], axis=1)
        ap.append(float(np.mean(hits / rank[rel])))
        if irr.size:
            diff = s[rel][:, None] - s[irr][None, :]
            bad = np.sum(diff < 0) + 0.5 * np.sum(diff == 0)
            rloss.append(bad / (rel.size * irr.size))
    return {
        "ranking_loss": float(np.mean(rloss)) if rloss else 0.0,
        "one_error": float(np.mean(oerr)) if oerr else 0.0,
        "coverage": float(np.mean(cov)) if n else 0.0,
        "average_precision": float(np.mean(ap)) if ap else 1.0,
    }


def evaluate(Y, P, S):
    """All implemented metrics in one flat dict."""
    out = {}
    out.update(example_metrics(Y, P))
    out.update(label_metrics(Y, P))
    out.update(ranking_metrics(Y, S))
    return out
