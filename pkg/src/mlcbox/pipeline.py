"""Composable MLC-to-MLC pipelines.

A pipeline is an ordered list of stages ending in one terminal strategy.
Earlier stages are either *transformers*, which rewrite the problem into
one smaller problem (PCA on features, PLST on labels), or *partitioners*,
which split the rows into several sub-problems (CBMLC). Fitting recurses
stage by stage and yields a :class:`ProblemTree`; prediction walks the same
tree, routing rows through partitioners and decoding label-space
reductions on the way back up.

New methods are added with :func:`register_method`::

    class Newmethod:
        kind = "transformer"
        params = {"dim": Param("dim", "numF*0.5", bound=lambda s: s["numF"])}

        def __init__(self, params, seed):
            ...
        def fit(self, problem):      # -> Problem for the child
            ...
        def transform(self, X):      # test-time feature map
            ...

    register_method("Newmethod", Newmethod)
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import scipy.sparse as sp

from ._util import ConfigError, dense, derive_seed
from .dataset import Dataset
from .learners import BinaryLearnerSpec, ConstantModel
from .reducers import (
    kmeans_assign,
    kmeans_fit,
    parse_dim,
    pca_fit,
    pca_transform,
    plst_decode,
    plst_encode,
    plst_fit,
    resolve_dim,
)
from .strategies import (
    BinaryRelevance,
    ClassifierChain,
    LabelPowerset,
    PairwiseRanking,
    RAkEL,
    RankingSingleLabel,
)
from .thresholding import ThresholdSpec

__all__ = [
    "Param",
    "MethodInfo",
    "StageSpec",
    "PipelineConfig",
    "Problem",
    "ProblemTree",
    "TransformerNode",
    "PartitionerNode",
    "TerminalNode",
    "register_method",
    "unregister_method",
    "get_method",
    "registered_methods",
    "validate_config",
    "fit",
    "predict",
]

KINDS = ("transformer", "partitioner", "terminal")


# -- registry ---------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    """Parameter schema entry.

    ``kind`` is one of ``dim`` (integer literal or expression over numF,
    numL and n, resolved per sub-problem and clamped by ``bound``), ``int``,
    ``float``, ``intlist`` or ``str``.
    """

    kind: str
    default: Any = None
    bound: Callable | None = None
    doc: str = ""


@dataclass(frozen=True)
class MethodInfo:
    name: str
    kind: str
    params: dict
    factory: Callable
    doc: str = ""
    label_space: bool = False
    regression_capable: bool = False

    def describe(self):
        parts = []
        for pname, p in self.params.items():
            parts.append(f"{pname}:{p.kind}={p.default!r}")
        return f"{self.name:<10} {self.kind:<12} {', '.join(parts) or '-'}"


_REGISTRY: dict[str, MethodInfo] = {}
_REGISTRY_LOCK = threading.Lock()


def register_method(name, factory, kind=None, params=None, doc=None, label_space=None,
                    regression_capable=None):
    """Make ``factory`` usable as a stage called ``name``.

    ``kind``, ``params``, ``label_space`` and ``regression_capable`` default
    to attributes of the same name on ``factory``.
    """
    kind = kind if kind is not None else getattr(factory, "kind", None)
    if kind not in KINDS:
        raise ValueError(f"method {name!r} must declare kind in {KINDS}, got {kind!r}")
    params = params if params is not None else getattr(factory, "params", {})
    schema = {}
    for pname, p in params.items():
        schema[pname] = p if isinstance(p, Param) else Param(_infer_kind(p), p)
    info = MethodInfo(
        name=name,
        kind=kind,
        params=schema,
        factory=factory,
        doc=doc if doc is not None else (factory.__doc__ or "").strip().split("\n")[0],
        label_space=bool(label_space if label_space is not None else getattr(factory, "label_space", False)),
        regression_capable=bool(
            regression_capable if regression_capable is not None
            else getattr(factory, "regression_capable", False)
        ),
    )
    with _REGISTRY_LOCK:
        if name in _REGISTRY:
            raise ValueError(f"method {name!r} is already registered")
        _REGISTRY[name] = info
    return info


def unregister_method(name):
    with _REGISTRY_LOCK:
        _REGISTRY.pop(name, None)


def get_method(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown method {name!r}") from None


def registered_methods():
    return [_REGISTRY[k] for k in sorted(_REGISTRY)]


def _infer_kind(default):
    if isinstance(default, bool):
        return "str"
    if isinstance(default, int):
        return "int"
    if isinstance(default, float):
        return "float"
    if isinstance(default, (list, tuple)):
        return "intlist"
    return "str"


# -- configuration ----------------------------------------------------------


@dataclass(frozen=True)
class StageSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineConfig:
    stages: tuple
    base: BinaryLearnerSpec = field(default_factory=BinaryLearnerSpec)
    threshold: ThresholdSpec = field(default_factory=ThresholdSpec)
    seed: int = 0

    def __post_init__(self):
        stages = tuple(s if isinstance(s, StageSpec) else StageSpec(s) for s in self.stages)
        object.__setattr__(self, "stages", stages)


def _check_param(p, value):
    if p.kind == "dim":
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if value < 1:
                return "must be >= 1"
            return None
        try:
            parse_dim(value)
        except ConfigError as exc:
            return str(exc)
        return None
    if p.kind == "int":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            return f"expected an integer, got {value!r}"
        return None
    if p.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return f"expected a number, got {value!r}"
        return None
    if p.kind == "intlist":
        if value is None:
            return None
        if not isinstance(value, (list, tuple)) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        ):
            return f"expected a list of integers, got {value!r}"
        return None
    return None


def validate_config(cfg):
    """Return a list of human-readable violations; empty means valid."""
    problems = []
    stages = cfg.stages
    if not stages:
        return ["empty pipeline"]
    infos = []
    for pos, st in enumerate(stages, start=1):
        info = _REGISTRY.get(st.name)
        if info is None:
            problems.append(f"stage {pos}: unknown method {st.name!r}")
            infos.append(None)
            continue
        infos.append(info)
        for key, value in st.params.items():
            if key not in info.params:
                problems.append(f"stage {pos} ({st.name}): unknown parameter {key!r}")
                continue
            err = _check_param(info.params[key], value)
            if err:
                problems.append(f"stage {pos} ({st.name}): parameter {key!r} {err}")

    for pos, info in enumerate(infos[:-1], start=1):
        if info is not None and info.kind == "terminal":
            problems.append(f"terminal not last: stage {pos} ({info.name}) is a terminal strategy")
    last = infos[-1]
    if last is not None and last.kind != "terminal":
        problems.append(f"pipeline must end with a terminal strategy, got {last.name!r} ({last.kind})")

    lsdr = [i for i in infos if i is not None and i.label_space]
    if len(lsdr) > 1:
        problems.append("at most one label-space reduction stage is supported")
    if lsdr and last is not None and last.kind == "terminal":
        if not last.regression_capable:
            problems.append(
                f"terminal {last.name!r} is not regression-capable, required after {lsdr[0].name}"
            )
        elif not cfg.base.regression_capable:
            problems.append(
                f"base learner {cfg.base.name!r} is not regression-capable, required after {lsdr[0].name}"
            )
    return problems


# -- problems and tree nodes -------------------------------------------------


@dataclass(frozen=True)
class Problem:
    """One (sub-)problem: features, targets and whether targets are real-valued."""

    X: Any
    Y: np.ndarray
    real_targets: bool = False

    @property
    def stats(self):
        return {"n": self.X.shape[0], "numF": self.X.shape[1], "numL": self.Y.shape[1]}


@dataclass
class TransformerNode:
    spec: StageSpec
    stage: Any
    child: Any
    path: tuple
    seed: int
    resolved: dict


@dataclass
class PartitionerNode:
    spec: StageSpec
    stage: Any
    children: list
    path: tuple
    seed: int
    resolved: dict


@dataclass
class TerminalNode:
    """A fitted strategy, or a ConstantModel for a zero-row sub-problem."""

    spec: StageSpec | None
    model: Any
    path: tuple
    seed: int
    resolved: dict
    n_targets: int


@dataclass
class ProblemTree:
    root: Any
    n_features: int
    n_labels: int
    config: PipelineConfig

    def predict(self, X):
        return predict(self, X)

    def nodes(self):
        """Depth-first list of every node."""
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            if isinstance(node, TransformerNode):
                stack.append(node.child)
            elif isinstance(node, PartitionerNode):
                stack.extend(reversed(node.children))
        return out

    def describe(self):
        """Per-node echo of method, resolved parameters and seed."""
        rows = []
        for node in self.nodes():
            name = node.spec.name if node.spec is not None else "Constant"
            rows.append({
                "path": "/".join(map(str, node.path)) or "root",
                "method": name,
                "params": node.resolved,
                "seed": node.seed,
            })
        return rows


def _node_seed(root_seed, path):
    return int(root_seed) if not path else derive_seed(root_seed, *path)


def _resolve_params(info, spec, stats):
    resolved = {}
    for pname, p in info.params.items():
        value = spec.params.get(pname, p.default)
        if p.kind == "dim" and value is not None:
            upper = p.bound(stats) if p.bound is not None else None
            value = resolve_dim(value, stats, upper)
        elif p.kind == "int" and value is not None:
            value = int(value)
        elif p.kind == "float" and value is not None:
            value = float(value)
        elif p.kind == "intlist" and value is not None:
            value = [int(v) for v in value]
        resolved[pname] = value
    return resolved


def _fit_node(cfg, stages, problem, path, n_jobs):
    seed = _node_seed(cfg.seed, path)
    spec = stages[0]
    info = get_method(spec.name)
    resolved = _resolve_params(info, spec, problem.stats)

    if info.kind == "terminal":
        model = info.factory(resolved, cfg.base, seed, problem.real_targets)
        model.fit(dense(problem.X), problem.Y)
        return TerminalNode(spec, model, path, seed, resolved, problem.Y.shape[1])

    stage = info.factory(resolved, seed)
    if info.kind == "transformer":
        child_problem = stage.fit(problem)
        child = _fit_node(cfg, stages[1:], child_problem, path + (0,), n_jobs)
        return TransformerNode(spec, stage, child, path, seed, resolved)

    assign = np.asarray(stage.fit(problem))
    n_parts = int(stage.n_parts)
    prior = np.asarray(problem.Y, dtype=np.float64).mean(axis=0) if problem.Y.shape[0] else \
        np.zeros(problem.Y.shape[1])

    def fit_child(i):
        rows = np.flatnonzero(assign == i)
        child_path = path + (i,)
        if rows.size == 0:
            return TerminalNode(None, ConstantModel(prior), child_path,
                                _node_seed(cfg.seed, child_path), {}, problem.Y.shape[1])
        sub = Problem(problem.X[rows], problem.Y[rows], problem.real_targets)
        return _fit_node(cfg, stages[1:], sub, child_path, 1)

    if n_jobs > 1 and n_parts > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            children = list(pool.map(fit_child, range(n_parts)))
    else:
        children = [fit_child(i) for i in range(n_parts)]
    return PartitionerNode(spec, stage, children, path, seed, resolved)


def fit(cfg, train, n_jobs=1):
    """Fit ``cfg`` on a :class:`Dataset` (or an ``(X, Y)`` pair)."""
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    if isinstance(train, Dataset):
        X, Y = train.features, train.labels
    else:
        X, Y = train
        Y = np.asarray(Y, dtype=np.uint8)
    if X.shape[0] == 0:
        raise ValueError("cannot fit on an empty training set")
    if not sp.issparse(X):
        X = np.asarray(X, dtype=np.float64)
    root = _fit_node(cfg, cfg.stages, Problem(X, Y), (), n_jobs)
    return ProblemTree(root, X.shape[1], Y.shape[1], cfg)


def _predict_node(node, X):
    if isinstance(node, TerminalNode):
        S = node.model.predict(dense(X)) if hasattr(node.model, "predict") else node.model.scores(X)
        return np.asarray(S, dtype=np.float64).reshape(X.shape[0], node.n_targets)
    if isinstance(node, TransformerNode):
        Xc = node.stage.transform(X)
        S = _predict_node(node.child, Xc)
        decode = getattr(node.stage, "decode", None)
        return decode(S) if decode is not None else S
    assign = np.asarray(node.stage.route(X))
    out = None
    for i, child in enumerate(node.children):
        rows = np.flatnonzero(assign == i)
        if rows.size == 0:
            continue
        S = _predict_node(child, X[rows])
        if out is None:
            out = np.empty((X.shape[0], S.shape[1]))
        out[rows] = S
    if out is None:
        out = _predict_node(node.children[0], X[:0])
    return out


def predict(tree, X):
    """Score matrix ``n x L`` (original label count), entries in [0, 1]."""
    if isinstance(X, Dataset):
        X = X.features
    if X.shape[1] != tree.n_features:
        raise ValueError(f"expected {tree.n_features} features, got {X.shape[1]}")
    if not sp.issparse(X):
        X = np.asarray(X, dtype=np.float64)
    S = _predict_node(tree.root, X)
    if S.shape != (X.shape[0], tree.n_labels):
        raise RuntimeError(f"pipeline produced shape {S.shape}, expected {(X.shape[0], tree.n_labels)}")
    return np.clip(S, 0.0, 1.0)


# -- built-in stages ---------------------------------------------------------


class PCA:
    """Principal component projection of the features."""

    kind = "transformer"
    params = {
        "dim": Param("dim", "numF*0.5", bound=lambda s: min(s["n"], s["numF"]),
                     doc="retained dimension"),
    }

    def __init__(self, params, seed):
        self.k = params["dim"]

    def fit(self, problem):
        self.state = pca_fit(problem.X, self.k)
        return Problem(pca_transform(self.state, problem.X), problem.Y, problem.real_targets)

    def transform(self, X):
        return pca_transform(self.state, X)


class PLST:
    """Principal label-space transformation; children regress the label codes."""

    kind = "transformer"
    label_space = True
    params = {
        "dim": Param("dim", "numL*0.5", bound=lambda s: min(s["n"], s["numL"]),
                     doc="reduced label dimension"),
    }

    def __init__(self, params, seed):
        self.k = params["dim"]

    def fit(self, problem):
        self.state = plst_fit(problem.Y, self.k)
        return Problem(problem.X, plst_encode(self.state, problem.Y), real_targets=True)

    def transform(self, X):
        return X

    def decode(self, S):
        return plst_decode(self.state, S)


class CBMLC:
    """k-means on the features; one sub-problem per cluster."""

    kind = "partitioner"
    params = {
        "k": Param("dim", 2, bound=lambda s: s["n"], doc="number of clusters"),
        "maxIter": Param("int", 100),
        "tol": Param("float", 1e-6),
    }

    def __init__(self, params, seed):
        self.m = params["k"]
        self.max_iter = params["maxIter"]
        self.tol = params["tol"]
        self.seed = seed

    def fit(self, problem):
        self.state = kmeans_fit(problem.X, self.m, self.seed, self.max_iter, self.tol)
        return self.state.labels

    @property
    def n_parts(self):
        return self.state.m

    def route(self, X):
        return kmeans_assign(self.state, X)


def _terminal(cls, doc, regression=False, **fixed):
    def factory(params, base, seed, real_targets):
        kwargs = {k: v for k, v in params.items() if v is not None}
        kwargs.update(fixed)
        if real_targets:
            kwargs["regression"] = True
        return cls(base, seed, **kwargs)

    factory.__doc__ = doc
    factory.regression_capable = regression
    return factory


def _register_builtins():
    register_method("PCA", PCA)
    register_method("PLST", PLST)
    register_method("CBMLC", CBMLC)
    register_method("BR", _terminal(BinaryRelevance, "Binary relevance", regression=True),
                    kind="terminal", params={})
    register_method("CC", _terminal(ClassifierChain, "Classifier chain (given order)"),
                    kind="terminal", params={"order": Param("intlist", None, doc="label order")})
    register_method("rCC", _terminal(ClassifierChain, "Classifier chain (random order)",
                                     random_order=True),
                    kind="terminal", params={})
    register_method("LP", _terminal(LabelPowerset, "Label powerset"), kind="terminal", params={})
    register_method("RAkEL", _terminal(RAkEL, "Random k-labelsets ensemble"), kind="terminal",
                    params={"k": Param("dim", 3, bound=lambda s: s["numL"], doc="labelset size"),
                            "m": Param("int", None, doc="ensemble size (default 2L)")})
    register_method("RPC", _terminal(PairwiseRanking, "Ranking by pairwise comparison"),
                    kind="terminal", params={})
    register_method("RSL", _terminal(RankingSingleLabel, "Ranking via single-label learning"),
                    kind="terminal", params={})


_register_builtins()
