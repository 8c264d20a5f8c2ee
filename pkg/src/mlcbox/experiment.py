"""k-fold cross-validation of a configured pipeline, plus report output."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ._util import derive_seed
from .config import render_config
from .dataset import dataset_stats, kfold_split, load_svmlight_multilabel
from .evaluation import CONVENTIONS, evaluate
from .pipeline import fit, predict
from .thresholding import apply_threshold, tune_scut

__all__ = [
    "THREADS_ENV",
    "FoldError",
    "ExperimentReport",
    "thread_count",
    "run_cv_experiment",
    "write_report",
    "format_table",
]

THREADS_ENV = "MLCBOX_THREADS"

METRICS = (
    "hamming_loss",
    "subset_accuracy",
    "example_f1",
    "macro_f1",
    "micro_f1",
    "ranking_loss",
    "one_error",
    "coverage",
    "average_precision",
)


class FoldError(RuntimeError):
    def __init__(self, fold, cause):
        self.fold = fold
        super().__init__(f"fold {fold} failed: {type(cause).__name__}: {cause}")


@dataclass
class ExperimentReport:
    config_text: str
    dataset: dict
    folds: list
    summary: dict
    fold_seconds: list = field(default_factory=list)

    def to_dict(self):
        # wall-clock times are left out so reports are reproducible byte for byte
        return {
            "config": self.config_text,
            "dataset": self.dataset,
            "conventions": CONVENTIONS,
            "std_ddof": 0,
            "folds": self.folds,
            "summary": self.summary,
        }


def thread_count(threads=None):
    if threads is not None:
        return max(1, int(threads))
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _tuned_thresholds(pcfg, train, seed):
    """Per-label Scut thresholds tuned on a held-out third of the training fold."""
    if train.n < 3:
        return np.full(train.L, 0.5)
    inner = kfold_split(train.n, 3, seed)
    fit_rows, held = inner.train_test(0)
    tree = fit(pcfg, train.subset(fit_rows))
    S = predict(tree, train.features[held])
    return tune_scut(train.labels[held], S)


def _run_fold(cfg, ds, split, fold):
    start = time.perf_counter()
    train_rows, test_rows = split.train_test(fold)
    train, test = ds.subset(train_rows), ds.subset(test_rows)
    fold_seed = derive_seed(cfg.seed, "fold", fold)
    pcfg = replace(cfg.pipeline, seed=fold_seed)

    tree = fit(pcfg, train)
    S = predict(tree, test.features)
    th = pcfg.threshold
    tuned = _tuned_thresholds(pcfg, train, derive_seed(fold_seed, "tune")) if th.tuned else None
    priors = train.labels.mean(axis=0)
    P = apply_threshold(th, S, priors=priors, tuned_thresholds=tuned)
    metrics = evaluate(test.labels, P, S)

    record = {
        "fold": fold,
        "n_train": int(train.n),
        "n_test": int(test.n),
        "seed": int(fold_seed),
        "metrics": {k: metrics[k] for k in METRICS},
        "nodes": tree.describe(),
    }
    if tuned is not None:
        record["thresholds"] = [float(t) for t in tuned]
    return record, time.perf_counter() - start


def run_cv_experiment(cfg, threads=None, write=True):
    """Cross-validate ``cfg.pipeline`` on ``cfg.dataset``.

    Every stage is fitted inside each fold on the training rows only. Folds
    may run on several threads; results are assembled in fold order so the
    report does not depend on the thread count.

    Raises
    ------
    FoldError
        If any fold fails; no report is written in that case.
    """
    ds = load_svmlight_multilabel(cfg.dataset_path(), name=cfg.dataset_name)
    split = kfold_split(ds.n, cfg.numCV, cfg.seed)
    n_threads = thread_count(threads)

    def job(fold):
        try:
            return _run_fold(cfg, ds, split, fold)
        except Exception as exc:
            raise FoldError(fold, exc) from exc

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            futures = [pool.submit(job, f) for f in range(cfg.numCV)]
            results = [fut.result() for fut in futures]
    else:
        results = [job(f) for f in range(cfg.numCV)]

    folds = [r for r, _ in results]
    summary = {}
    for name in METRICS:
        values = [f["metrics"][name] for f in folds]
        summary[name] = {"mean": float(np.mean(values)), "std": float(np.std(values))}

    stats = dataset_stats(ds).as_dict()
    stats["name"] = ds.name
    report = ExperimentReport(
        config_text=render_config(cfg),
        dataset=stats,
        folds=folds,
        summary=summary,
        fold_seconds=[t for _, t in results],
    )
    if write:
        write_report(report, cfg.output_path())
    return report


def _csv_text(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["fold", *METRICS])
    for f in report.folds:
        writer.writerow([f["fold"], *(repr(f["metrics"][m]) for m in METRICS)])
    writer.writerow(["mean", *(repr(report.summary[m]["mean"]) for m in METRICS)])
    writer.writerow(["std", *(repr(report.summary[m]["std"]) for m in METRICS)])
    return buf.getvalue()


def write_report(report, output):
    """Write ``<output>.json`` and ``<output>.csv``; timings go to ``<output>.timings.csv``."""
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    json_path = output.with_name(output.name + ".json")
    csv_path = output.with_name(output.name + ".csv")
    json_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    csv_path.write_text(_csv_text(report))
    timing = "fold,seconds\n" + "".join(f"{i},{t:.6f}\n" for i, t in enumerate(report.fold_seconds))
    output.with_name(output.name + ".timings.csv").write_text(timing)
    return json_path, csv_path


def format_table(report):
    """Human-readable per-fold and mean +- std table."""
    header = f"{'metric':<18}" + "".join(f"{'fold ' + str(f['fold']):>10}" for f in report.folds)
    header += f"{'mean':>10}{'std':>10}"
    lines = [header, "-" * len(header)]
    for m in METRICS:
        row = f"{m:<18}" + "".join(f"{f['metrics'][m]:>10.4f}" for f in report.folds)
        row += f"{report.summary[m]['mean']:>10.4f}{report.summary[m]['std']:>10.4f}"
        lines.append(row)
    if report.fold_seconds:
        lines.append(f"{'seconds':<18}" + "".join(f"{t:>10.2f}" for t in report.fold_seconds))
    return "\n".join(lines)
