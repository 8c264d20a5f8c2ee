"""Command-line entry point.

    mlcbox run <config> [--threads N] [--output PREFIX]
    mlcbox validate <config>
    mlcbox list-methods
    mlcbox stats <dataset>

Exit status: 0 on success, 1 on configuration errors, 2 on runtime errors.
``--plugin`` (repeatable) imports a module or ``.py`` file before the
command runs, so methods it registers become available.
"""

from __future__ import annotations

import argparse
import importlib
import importlib.util
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ._util import ConfigError
from .config import parse_config
from .dataset import DatasetParseError, dataset_stats, load_svmlight_multilabel
from .experiment import THREADS_ENV, FoldError, format_table, run_cv_experiment
from .pipeline import registered_methods

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def load_plugin(spec):
    path = Path(spec)
    if path.suffix == ".py":
        if not path.exists():
            raise ConfigError(f"plugin file {spec!r} not found")
        mod_spec = importlib.util.spec_from_file_location(path.stem, path)
        module = importlib.util.module_from_spec(mod_spec)
        mod_spec.loader.exec_module(module)
        return module
    try:
        return importlib.import_module(spec)
    except ImportError as exc:
        raise ConfigError(f"cannot import plugin {spec!r}: {exc}") from None


def _cmd_run(args):
    cfg = parse_config(args.config)
    if args.output:
        cfg = replace(cfg, output=str(Path(args.output).resolve()))
    report = run_cv_experiment(cfg, threads=args.threads)
    print(f"dataset {report.dataset['name']}: n={report.dataset['n']} "
          f"numF={report.dataset['numF']} numL={report.dataset['numL']}, numCV={cfg.numCV}")
    print("pipeline " + " -> ".join(s.name for s in cfg.pipeline.stages)
          + f" | base {cfg.pipeline.base.name} | {cfg.pipeline.threshold.type}")
    print(format_table(report))
    out = cfg.output_path()
    print(f"report written to {out}.json and {out}.csv")
    return EXIT_OK


def _cmd_validate(args):
    cfg = parse_config(args.config)
    print(f"OK: {len(cfg.pipeline.stages)} stage(s): "
          + " -> ".join(s.name for s in cfg.pipeline.stages))
    for w in cfg.warnings:
        print(f"warning: {w}")
    return EXIT_OK


def _cmd_list(args):
    print(f"{'name':<10} {'kind':<12} parameters")
    for info in registered_methods():
        print(info.describe())
    return EXIT_OK


def _cmd_stats(args):
    try:
        ds = load_svmlight_multilabel(args.dataset)
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from None
    stats = dataset_stats(ds).as_dict()
    if args.json:
        print(json.dumps(stats, indent=2))
    else:
        for k, v in stats.items():
            print(f"{k:<20} {v}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="mlcbox", description=__doc__.split("\n")[0])
    parser.add_argument("--plugin", action="append", default=[],
                        help="module or .py file registering extra methods")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="cross-validate a configured pipeline")
    p.add_argument("config")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or 1)")
    p.add_argument("--output", help="report path prefix (overrides run.output)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("list-methods", help="list registered methods")
    p.set_defaults(func=_cmd_list)

    p = sub.add_parser("stats", help="print dataset statistics")
    p.add_argument("dataset")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stats)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        for plugin in args.plugin:
            load_plugin(plugin)
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetParseError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except FoldError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
