"""Experiment configuration files.

A config is line-oriented ``key = value`` text. Section headers prefix the
keys that follow, so these two forms are equivalent::

    [method.1]
    name = PCA
    dim = numF*0.5

    method.1.name = PCA
    method.1.dim = numF*0.5

Sections: ``[dataset]`` (path, name), ``[method.N]`` (one per stage, in
ascending N), ``[base]`` (learner name and parameters, optionally a
LIBLINEAR-style ``svmparam``), ``[threshold]`` (type, param) and ``[run]``
(numCV, seed, output). ``#`` and ``;`` start comments.
"""

from __future__ import annotations

import logging
import re
import shlex
from dataclasses import dataclass, field
from pathlib import Path

from ._util import ConfigError
from .learners import LEARNER_PARAMS, BinaryLearnerSpec
from .pipeline import PipelineConfig, StageSpec, get_method, validate_config
from .thresholding import ThresholdSpec

log = logging.getLogger(__name__)

__all__ = ["ExperimentConfig", "parse_config", "parse_config_text", "render_config"]

_INT_RE = re.compile(r"^[+-]?\d+$")
_LIST_RE = re.compile(r"^\[?\s*[+-]?\d+(\s*,\s*[+-]?\d+)+\s*\]?$|^\[\s*[+-]?\d*\s*\]$")
_METHOD_RE = re.compile(r"^method\.(\d+)\.(\w+)$")
_SECTIONS = {"dataset", "method", "base", "threshold", "run"}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    numCV: int
    pipeline: PipelineConfig
    output: str
    seed: int
    dataset_name: str | None = None
    base_dir: str = field(default=".", compare=False)
    warnings: tuple = field(default=(), compare=False)

    def dataset_path(self):
        p = Path(self.dataset)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def output_path(self):
        p = Path(self.output)
        return p if p.is_absolute() else Path(self.base_dir) / p


def parse_value(raw):
    """Typed value: quoted -> str, integer, float, integer list, else str."""
    v = raw.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "'\"":
        return v[1:-1]
    if _INT_RE.match(v):
        return int(v)
    if _LIST_RE.match(v):
        inner = v.strip("[] ")
        return [int(x) for x in inner.split(",")] if inner else []
    try:
        return float(v)
    except ValueError:
        return v


def _read_pairs(text, source):
    pairs = {}
    prefix = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        loc = f"{source}:{lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", loc)
            prefix = line[1:-1].strip()
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"expected key = value, got {line!r}", loc)
        key = key.strip()
        value = re.split(r"\s[#;]", value, maxsplit=1)[0]
        # keys already qualified with a top-level section ignore the header
        absolute = key.split(".", 1)[0] in _SECTIONS and "." in key
        full = f"{prefix}.{key}" if prefix and not absolute else key
        if full in pairs:
            raise ConfigError(f"duplicate key {full!r}", loc)
        pairs[full] = (parse_value(value), loc)
    return pairs


def _parse_svmparam(text, params, warnings, loc):
    toks = shlex.split(str(text))
    i = 0
    while i < len(toks):
        opt = toks[i]
        arg = toks[i + 1] if i + 1 < len(toks) else None
        if opt == "-q":
            i += 1
            continue
        if arg is None:
            raise ConfigError(f"svmparam option {opt} needs a value", loc)
        if opt in ("-s", "-S"):
            if arg != "2":
                warnings.append(f"{loc}: svmparam solver {arg} not available; using L2-loss dual solver")
        elif opt == "-c":
            params["C"] = float(arg)
        elif opt == "-e":
            params["tol"] = float(arg)
        else:
            warnings.append(f"{loc}: svmparam option {opt} ignored")
        i += 2


def parse_config_text(text, source="<config>", base_dir="."):
    pairs = _read_pairs(text, source)
    warnings = []

    def take(key, default=None, required=False):
        if key in pairs:
            return pairs.pop(key)
        if required:
            raise ConfigError(f"missing required key {key!r}", source)
        return default, source

    dataset, _ = take("dataset.path", required=True)
    dataset_name, _ = take("dataset.name")
    numCV, numcv_loc = take("run.numCV", 5)
    seed, seed_loc = take("run.seed", 0)
    output, _ = take("run.output", None)
    if not isinstance(numCV, int) or numCV < 2:
        raise ConfigError(f"run.numCV must be an integer >= 2, got {numCV!r}", numcv_loc)
    if not isinstance(seed, int):
        raise ConfigError(f"run.seed must be an integer, got {seed!r}", seed_loc)
    if output is None:
        output = f"{Path(str(dataset)).stem}_report"

    stage_keys = {}
    for key in list(pairs):
        m = _METHOD_RE.match(key)
        if m:
            stage_keys.setdefault(int(m.group(1)), {})[m.group(2)] = pairs.pop(key)
    stages = []
    for idx in sorted(stage_keys):
        entries = stage_keys[idx]
        if "name" not in entries:
            loc = next(iter(entries.values()))[1]
            raise ConfigError(f"method.{idx} has no name", loc)
        name, loc = entries.pop("name")
        try:
            get_method(str(name))
        except ConfigError as exc:
            raise ConfigError(str(exc), loc) from None
        stages.append((StageSpec(str(name), {k: v for k, (v, _) in entries.items()}), loc))

    base_name, base_loc = take("base.name", "linear_svm")
    if base_name == "svm":
        warnings.append(f"{base_loc}: kernel 'svm' is not available; using linear_svm")
        base_name = "linear_svm"
    base_params = {}
    svmparam, svm_loc = take("base.svmparam")
    if svmparam is not None:
        if base_name != "linear_svm":
            warnings.append(f"{svm_loc}: svmparam ignored for base {base_name!r}")
        else:
            _parse_svmparam(svmparam, base_params, warnings, svm_loc)
    for key in list(pairs):
        if key.startswith("base."):
            value, loc = pairs.pop(key)
            pname = key[5:]
            if pname not in LEARNER_PARAMS.get(base_name, {}):
                raise ConfigError(f"unknown parameter {pname!r} for base learner {base_name!r}", loc)
            base_params[pname] = value
    try:
        base = BinaryLearnerSpec(str(base_name), base_params)
    except ConfigError as exc:
        raise ConfigError(str(exc), base_loc) from None

    th_type, th_loc = take("threshold.type", "Scut")
    th_param, _ = take("threshold.param", 0.5 if th_type == "Scut" else (1 if th_type == "Rcut" else None))
    try:
        threshold = ThresholdSpec(str(th_type), th_param)
    except ConfigError as exc:
        raise ConfigError(str(exc), th_loc) from None

    for key, (_, loc) in pairs.items():
        warnings.append(f"{loc}: unknown key {key!r} ignored")
    for w in warnings:
        log.warning(w)

    pipeline = PipelineConfig(tuple(s for s, _ in stages), base, threshold, seed)
    problems = validate_config(pipeline)
    if problems:
        loc = stages[-1][1] if stages else source
        raise ConfigError("invalid pipeline: " + "; ".join(problems), loc)

    return ExperimentConfig(
        dataset=str(dataset),
        numCV=numCV,
        pipeline=pipeline,
        output=str(output),
        seed=seed,
        dataset_name=None if dataset_name is None else str(dataset_name),
        base_dir=str(base_dir),
        warnings=tuple(warnings),
    )


def parse_config(path):
    path = Path(path)
    return parse_config_text(path.read_text(), str(path), base_dir=str(path.parent))


def _render_value(v):
    if isinstance(v, bool):
        return repr(str(v))
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(str(int(x)) for x in v) + "]"
    s = str(v)
    if parse_value(s) != s or s != s.strip() or re.search(r"[#;]", s):
        return f'"{s}"'
    return s


def render_config(cfg):
    """Canonical text form; ``parse_config_text(render_config(c)) == c``."""
    lines = ["[dataset]", f"path = {_render_value(cfg.dataset)}"]
    if cfg.dataset_name is not None:
        lines.append(f"name = {_render_value(cfg.dataset_name)}")
    for i, st in enumerate(cfg.pipeline.stages, start=1):
        lines += ["", f"[method.{i}]", f"name = {st.name}"]
        lines += [f"{k} = {_render_value(v)}" for k, v in st.params.items()]
    lines += ["", "[base]", f"name = {cfg.pipeline.base.name}"]
    lines += [f"{k} = {_render_value(v)}" for k, v in cfg.pipeline.base.params.items()]
    th = cfg.pipeline.threshold
    lines += ["", "[threshold]", f"type = {th.type}"]
    if th.param is not None:
        lines.append(f"param = {_render_value(th.param)}")
    lines += ["", "[run]", f"numCV = {cfg.numCV}", f"seed = {cfg.seed}",
              f"output = {_render_value(cfg.output)}"]
    return "\n".join(lines) + "\n"
