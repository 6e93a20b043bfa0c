"""Command-line entry point: ``neurolasso simulate | fit | experiment``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .classic import cv_statistical_lasso, lambda_grid
from .data import FittedModel, make_folds, mix_seed, standardize
from .datagen import SyntheticConfig, simulate
from .errors import NeuroLassoError
from .harness import (ExperimentConfig, config_from_mapping, load_csv, method_tag,
                      read_config_items, render_report, run_experiment, save_csv,
                      write_failures)
from .training import TrainConfig, fit_restricted, fit_standard, fit_voting


@dataclass(frozen=True)
class Simulate:
    config: SyntheticConfig
    out: str
    test_out: str
    support_out: Optional[str] = None


@dataclass(frozen=True)
class Fit:
    data: str
    target: str
    task: str
    method: str
    K: int
    grid_count: int
    grid_ratio: float
    train_cfg: TrainConfig
    seed: int
    model_out: Optional[str]


@dataclass(frozen=True)
class Experiment:
    config: ExperimentConfig
    out: Optional[str]
    fmt: str
    failures: Optional[str]


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="neurolasso",
                                 description="Statistical and neural lasso fitting and benchmarks.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a synthetic train/test pair as CSV")
    s.add_argument("--p", type=_positive_int, default=20)
    s.add_argument("--n-train", type=_positive_int, default=50)
    s.add_argument("--n-test", type=_positive_int, default=1000)
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--noise-std", type=float, default=1.0)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out", required=True, help="training CSV path")
    s.add_argument("--test-out", help="test CSV path (default: <out>_test.csv)")
    s.add_argument("--support-out", help="write the true support, one 0/1 per column")

    f = sub.add_parser("fit", help="fit one method to a CSV dataset")
    f.add_argument("--data", required=True)
    f.add_argument("--target", default="y")
    f.add_argument("--task", choices=("linear", "logistic"), default="linear")
    f.add_argument("--method", choices=("statistical", "standard", "restricted", "voting"),
                   default="statistical")
    f.add_argument("--k", type=_positive_int, default=5)
    f.add_argument("--grid-count", type=_positive_int, default=100)
    f.add_argument("--grid-ratio", type=float, default=1e-3)
    f.add_argument("--lr", type=float, default=TrainConfig.lr)
    f.add_argument("--max-epochs", type=_positive_int, default=TrainConfig.max_epochs)
    f.add_argument("--patience", type=_positive_int, default=TrainConfig.patience)
    f.add_argument("--seed", type=_seed, default=0)
    f.add_argument("--model-out", help="model file path (default: stdout)")

    e = sub.add_parser("experiment", help="run a repeated-validation benchmark")
    e.add_argument("--config", help="key = value experiment file; flags below override it")
    e.add_argument("--kind")
    e.add_argument("--repetitions", type=_positive_int)
    e.add_argument("--k", type=_positive_int, dest="K")
    e.add_argument("--methods", help="comma-separated, e.g. statistical,voting")
    e.add_argument("--p", type=_positive_int)
    e.add_argument("--n-train", type=_positive_int)
    e.add_argument("--n-test", type=_positive_int)
    e.add_argument("--rho", type=float)
    e.add_argument("--noise-std", type=float)
    e.add_argument("--data", dest="data_path")
    e.add_argument("--target", dest="target_column")
    e.add_argument("--dataset", help="named dataset supplying default train/test sizes")
    e.add_argument("--train-size", type=_positive_int)
    e.add_argument("--test-size", type=_positive_int)
    e.add_argument("--grid-count", type=_positive_int)
    e.add_argument("--grid-ratio", type=float)
    e.add_argument("--lr", type=float)
    e.add_argument("--max-epochs", type=_positive_int)
    e.add_argument("--patience", type=_positive_int)
    e.add_argument("--seed", type=_seed, dest="base_seed")
    e.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    e.add_argument("--out", help="report path (default: stdout)")
    e.add_argument("--format", choices=("csv", "markdown"), default="csv")
    e.add_argument("--failures", help="write the failure log here")
    return ap


_EXPERIMENT_KEYS = ("kind", "repetitions", "K", "methods", "p", "n_train", "n_test", "rho",
                    "noise_std", "data_path", "target_column", "dataset", "train_size",
                    "test_size", "grid_count", "grid_ratio", "lr", "max_epochs", "patience",
                    "base_seed")


def parse_args(argv=None):
    """Parse ``argv`` into a :class:`Simulate`, :class:`Fit` or :class:`Experiment`.

    Usage errors exit with status 2 (argparse's convention).
    """
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        if ns.command == "simulate":
            cfg = SyntheticConfig(p=ns.p, n_train=ns.n_train, n_test=ns.n_test, rho=ns.rho,
                                  noise_std=ns.noise_std, seed=ns.seed)
            out = Path(ns.out)
            test_out = ns.test_out or str(out.with_name(out.stem + "_test" + out.suffix))
            return Simulate(cfg, ns.out, test_out, ns.support_out)
        if ns.command == "fit":
            tcfg = TrainConfig(lr=ns.lr, max_epochs=ns.max_epochs, patience=ns.patience,
                               seed=ns.seed)
            return Fit(ns.data, ns.target, ns.task, method_tag(ns.method), ns.k, ns.grid_count,
                       ns.grid_ratio, tcfg, ns.seed, ns.model_out)
        items = {}
        if ns.config:
            items.update(read_config_items(ns.config))
        for key in _EXPERIMENT_KEYS:
            val = getattr(ns, key)
            if val is not None:
                items[key] = val
        cfg = replace(config_from_mapping(items), threads=ns.threads)
        return Experiment(cfg, ns.out, ns.format, ns.failures)
    except (NeuroLassoError, ValueError, OSError) as exc:
        ap.error(str(exc))


# ---------------------------------------------------------------------------
# model files

def emit_model(model: FittedModel, path=None, names=None) -> str:
    """Write a key-value model file; only nonzero coefficients get a line."""
    names = names or tuple(f"x{j + 1}" for j in range(model.p))
    lines = [f"task={model.task}", f"method={model.method}", f"lambda={model.lam!r}",
             f"intercept_original={model.intercept_original!r}"]
    for j in range(model.p):
        if model.beta[j] != 0:
            lines.append(f"{names[j]},{float(model.beta_original[j])!r}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_model(path) -> dict:
    """Parse a file written by :func:`emit_model`."""
    out = {"coefficients": {}}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v if k in ("task", "method") else float(v)
        elif line:
            name, v = line.rsplit(",", 1)
            out["coefficients"][name] = float(v)
    return out


# ---------------------------------------------------------------------------

def _run_fit(cmd: Fit):
    ds = load_csv(cmd.data, cmd.target, cmd.task)
    std, _ = standardize(ds, cmd.task)
    grid = lambda_grid(std, cmd.task, cmd.grid_count, cmd.grid_ratio)
    folds = make_folds(ds.n, cmd.K, mix_seed(cmd.seed, 0))
    tcfg = replace(cmd.train_cfg, seed=mix_seed(cmd.seed, 1))
    if cmd.method == "statistical":
        model = cv_statistical_lasso(ds, cmd.task, cmd.K, grid, folds=folds)
    elif cmd.method == "standard_neural":
        model = fit_standard(ds, cmd.task, grid, tcfg)
    elif cmd.method == "restricted_neural":
        model = fit_restricted(ds, cmd.task, grid, cmd.K, tcfg, folds=folds)
    else:
        model = fit_voting(ds, cmd.task, grid, cmd.K, tcfg, folds=folds)
    text = emit_model(model, cmd.model_out, ds.column_names())
    if cmd.model_out is None:
        sys.stdout.write(text)


def main(argv=None) -> int:
    cmd = parse_args(argv)
    try:
        if isinstance(cmd, Simulate):
            train, test = simulate(cmd.config)
            save_csv(train, cmd.out)
            save_csv(test, cmd.test_out)
            if cmd.support_out:
                Path(cmd.support_out).write_text(
                    "\n".join(str(int(v)) for v in train.truth_support) + "\n", encoding="utf-8")
        elif isinstance(cmd, Fit):
            _run_fit(cmd)
        else:
            table = run_experiment(cmd.config)
            text = render_report(table, cmd.fmt)
            if cmd.out:
                Path(cmd.out).write_text(text, encoding="utf-8")
            else:
                sys.stdout.write(text)
            if cmd.failures:
                write_failures(table, cmd.failures)
    except (NeuroLassoError, OSError, ValueError) as exc:
        print(f"neurolasso: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
