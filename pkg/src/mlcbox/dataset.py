"""Multi-label dataset model, SVMlight-style ingestion and CV splitting.

File format, one instance per line::

    1,3 1:0.5 4:0.2
     2:1.0

The leading comma-separated list holds 1-based label indices (possibly
empty), followed by 1-based ``index:value`` feature pairs. ``#`` starts a
comment. An optional header line ``#n=<n> d=<d> L=<L>`` fixes the
dimensions instead of inferring them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Dataset",
    "CVSplit",
    "StatsRecord",
    "DatasetParseError",
    "make_feature_matrix",
    "make_label_matrix",
    "load_svmlight_multilabel",
    "write_svmlight_multilabel",
    "kfold_split",
    "dataset_stats",
]

_HEADER_RE = re.compile(r"^#\s*n=(\d+)\s+d=(\d+)\s+L=(\d+)\s*$")


class DatasetParseError(ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def make_feature_matrix(X, n_features=None):
    """Coerce ``X`` to a canonical CSR feature matrix (sorted indices, float64)."""
    if sp.issparse(X):
        M = sp.csr_matrix(X, dtype=np.float64, copy=True)
    else:
        M = sp.csr_matrix(np.asarray(X, dtype=np.float64))
    if n_features is not None and n_features != M.shape[1]:
        M = sp.csr_matrix((M.data, M.indices, M.indptr), shape=(M.shape[0], n_features))
    M.eliminate_zeros()
    M.sort_indices()
    if not np.all(np.isfinite(M.data)):
        raise ValueError("feature values must be finite")
    return M


def make_label_matrix(Y):
    """Coerce ``Y`` to a dense 0/1 ``uint8`` matrix."""
    Y = np.asarray(Y)
    if Y.ndim != 2:
        raise ValueError(f"label matrix must be 2-D, got shape {Y.shape}")
    if not np.all((Y == 0) | (Y == 1)):
        raise ValueError("label matrix entries must be 0 or 1")
    return Y.astype(np.uint8)


@dataclass(frozen=True)
class Dataset:
    """Paired feature matrix (n x d, CSR) and binary label matrix (n x L)."""

    features: sp.csr_matrix
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        object.__setattr__(self, "features", make_feature_matrix(self.features))
        object.__setattr__(self, "labels", make_label_matrix(self.labels))
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"features have {self.features.shape[0]} rows but labels have "
                f"{self.labels.shape[0]}"
            )

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    @property
    def L(self):
        return self.labels.shape[1]

    def label_sets(self):
        """Per-row sorted tuples of relevant label indices."""
        return [tuple(np.flatnonzero(row).tolist()) for row in self.labels]

    def subset(self, rows):
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.features[rows], self.labels[rows], self.name)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        a, b = self.features, other.features
        return (
            self.name == other.name
            and a.shape == b.shape
            and np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.indices, b.indices)
            and np.array_equal(a.data, b.data)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


def _parse_line(body, lineno):
    tokens = body.split()
    if body[:1].isspace() or not tokens or ":" in tokens[0]:
        label_tok, feat_toks = "", tokens
    else:
        label_tok, feat_toks = tokens[0], tokens[1:]

    labels = []
    if label_tok:
        for part in label_tok.split(","):
            if not part.isdigit():
                raise DatasetParseError(f"bad label index {part!r}", lineno)
            j = int(part)
            if j < 1:
                raise DatasetParseError("label indices are 1-based", lineno)
            labels.append(j - 1)
        labels = sorted(set(labels))

    feats = {}
    for tok in feat_toks:
        idx, sep, val = tok.partition(":")
        if not sep or not idx.isdigit():
            raise DatasetParseError(f"bad feature token {tok!r}", lineno)
        i = int(idx)
        if i < 1:
            raise DatasetParseError("feature indices are 1-based", lineno)
        try:
            v = float(val)
        except ValueError:
            raise DatasetParseError(f"bad feature value {val!r}", lineno) from None
        if not math.isfinite(v):
            raise DatasetParseError(f"non-finite feature value {val!r}", lineno)
        if i - 1 in feats:
            raise DatasetParseError(f"duplicate feature index {i}", lineno)
        feats[i - 1] = v
    return labels, sorted(feats.items())


def load_svmlight_multilabel(path, name=None):
    """Parse a multi-label SVMlight file into a :class:`Dataset`.

    Raises
    ------
    DatasetParseError
        On malformed lines, non-finite values, or indices beyond the header
        dimensions. The message carries the 1-based line number.
    """
    path = Path(path)
    header = None
    rows = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if line.lstrip().startswith("#"):
                m = _HEADER_RE.match(line.strip())
                if m and header is None and not rows:
                    header = tuple(int(g) for g in m.groups())
                continue
            body = line.split("#", 1)[0]
            if not body.strip():
                continue
            rows.append((lineno,) + _parse_line(body, lineno))

    max_f = max((f[-1][0] + 1 for _, _, f in rows if f), default=0)
    max_l = max((lab[-1] + 1 for _, lab, _ in rows if lab), default=0)
    if header is not None:
        hn, d, L = header
        if hn != len(rows):
            raise DatasetParseError(f"header declares n={hn} but file has {len(rows)} rows")
        for lineno, lab, f in rows:
            if f and f[-1][0] >= d:
                raise DatasetParseError(f"feature index {f[-1][0] + 1} exceeds d={d}", lineno)
            if lab and lab[-1] >= L:
                raise DatasetParseError(f"label index {lab[-1] + 1} exceeds L={L}", lineno)
    else:
        d, L = max_f, max_l

    indptr = [0]
    indices, data = [], []
    Y = np.zeros((len(rows), L), dtype=np.uint8)
    for r, (_, lab, f) in enumerate(rows):
        Y[r, lab] = 1
        indices.extend(i for i, _ in f)
        data.extend(v for _, v in f)
        indptr.append(len(indices))
    X = sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32), np.asarray(indptr)),
        shape=(len(rows), d),
    )
    return Dataset(X, Y, name if name is not None else path.stem)


def write_svmlight_multilabel(ds, path, header=True):
    """Write ``ds`` in the format read by :func:`load_svmlight_multilabel`.

    Values are written with ``repr`` so reparsing is exact.
    """
    X = ds.features
    with Path(path).open("w") as fh:
        if header:
            fh.write(f"#n={ds.n} d={ds.d} L={ds.L}\n")
        for r in range(ds.n):
            labels = ",".join(str(j + 1) for j in np.flatnonzero(ds.labels[r]))
            lo, hi = X.indptr[r], X.indptr[r + 1]
            feats = " ".join(f"{i + 1}:{float(v)!r}" for i, v in zip(X.indices[lo:hi], X.data[lo:hi]))
            if not labels and not feats:
                # a blank line would be skipped on reload; explicit zeros are dropped again
                feats = "1:0.0"
            fh.write(f"{labels} {feats}".rstrip() + "\n")


@dataclass(frozen=True)
class CVSplit:
    numCV: int
    folds: tuple
    seed: int

    def train_test(self, fold):
        test = self.folds[fold]
        train = np.sort(np.concatenate([f for i, f in enumerate(self.folds) if i != fold]))
        return train, test


def kfold_split(n, numCV, seed):
    """Random k-fold partition of ``range(n)``; fold sizes differ by at most one."""
    if numCV < 2 or numCV > n:
        raise ValueError(f"numCV must satisfy 2 <= numCV <= n (got numCV={numCV}, n={n})")
    perm = np.random.default_rng(seed).permutation(n)
    folds = tuple(np.sort(chunk) for chunk in np.array_split(perm, numCV))
    return CVSplit(numCV=numCV, folds=folds, seed=seed)


@dataclass(frozen=True)
class StatsRecord:
    numF: int
    numL: int
    n: int
    cardinality: float
    density: float
    distinct_labelsets: int
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "n": self.n,
            "numF": self.numF,
            "numL": self.numL,
            "cardinality": self.cardinality,
            "density": self.density,
            "distinct_labelsets": self.distinct_labelsets,
        }


def dataset_stats(ds):
    Y = ds.labels
    n, L = Y.shape
    total = int(Y.sum())
    card = total / n if n else 0.0
    distinct = len(np.unique(Y, axis=0)) if n else 0
    return StatsRecord(
        numF=ds.d,
        numL=L,
        n=n,
        cardinality=card,
        density=card / L if L else 0.0,
        distinct_labelsets=distinct,
    )
