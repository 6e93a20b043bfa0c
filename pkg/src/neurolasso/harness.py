"""Repeated-validation benchmarks comparing the four lasso fitters.

Every repetition draws its own data (or train/test partition of a real
dataset) from a seed derived with :func:`neurolasso.data.mix_seed`; all
methods inside a repetition share the training set, test set, fold
assignment and penalty grid. Repetitions are independent and may run in a
process pool; aggregation is an ordered reduction by repetition index, so
the report does not depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .classic import cv_statistical_lasso, lambda_grid
from .data import LabeledDataset, make_folds, mix_seed, rng, standardize
from .datagen import SyntheticConfig, simulate
from .errors import (BadConfig, MissingTarget, NeuroLassoError, NonBinaryTarget, ParseError,
                     ZeroVariance)
from .metrics import evaluate, paired_t_test
from .training import TrainConfig, fit_restricted, fit_standard, fit_voting

log = logging.getLogger(__name__)

METHOD_ORDER = ("statistical", "standard_neural", "restricted_neural", "voting_neural")
METRIC_ORDER = ("mse", "acc", "precision", "recall", "selected_fraction")
KINDS = ("synthetic_linear", "synthetic_logistic", "real_linear", "real_logistic")

# default train/test sizes for the named benchmark datasets
BENCHMARK_SPLITS = {
    "white_wine": (4000, 898),
    "boston": (400, 106),
    "abalone": (3342, 835),
    "suicide_severity": (200, 149),
    "adhd": (47, 12),
    "cancer": (445, 124),
    "spam": (3975, 626),
    "ionosphere": (299, 52),
}

_ALIASES = {
    "statistical": "statistical",
    "standard": "standard_neural",
    "restricted": "restricted_neural",
    "voting": "voting_neural",
}


def method_tag(name: str) -> str:
    """Canonical method tag from a short (``voting``) or full (``voting_neural``) name."""
    if name in METHOD_ORDER:
        return name
    try:
        return _ALIASES[name]
    except KeyError:
        raise BadConfig(f"unknown method {name!r}") from None


class ExperimentAborted(NeuroLassoError, RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "synthetic_linear"
    repetitions: int = 100
    K: int = 5
    methods: tuple = METHOD_ORDER
    synthetic: Optional[SyntheticConfig] = None
    data_path: Optional[str] = None
    target_column: Optional[str] = None
    train_size: Optional[int] = None
    test_size: Optional[int] = None
    grid_count: int = 100
    grid_ratio: float = 1e-3
    train_cfg: TrainConfig = TrainConfig()
    base_seed: int = 0
    output_path: Optional[str] = None
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadConfig(f"unknown kind {self.kind!r}")
        if self.repetitions < 1:
            raise BadConfig("repetitions must be >= 1")
        if self.K < 2:
            raise BadConfig("K must be >= 2")
        object.__setattr__(self, "methods", tuple(method_tag(m) for m in self.methods))
        if self.kind.startswith("synthetic") and self.synthetic is None:
            object.__setattr__(self, "synthetic",
                               SyntheticConfig(logistic=self.kind == "synthetic_logistic"))
        if self.kind.startswith("real"):
            if not self.data_path or not self.target_column:
                raise BadConfig("real-data experiments need data_path and target_column")
            if not self.train_size or not self.test_size:
                raise BadConfig("real-data experiments need train_size and test_size")

    @property
    def task(self) -> str:
        return "logistic" if self.kind.endswith("logistic") else "linear"


@dataclass(frozen=True)
class ReportRow:
    method: str
    metric: str
    mean: float
    sd: float
    p_value: Optional[float] = None
    star: str = ""
    n: int = 0


def star_for(p_value) -> str:
    if p_value is None or not math.isfinite(p_value):
        return ""
    if p_value < 0.01:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""


@dataclass
class ReportTable:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    per_rep: dict = field(default_factory=dict)

    def get(self, method, metric) -> ReportRow:
        for r in self.rows:
            if r.method == method_tag(method) and r.metric == metric:
                return r
        raise KeyError((method, metric))


# ---------------------------------------------------------------------------
# CSV input

def load_csv(path, target_column: str, task: str = "linear") -> LabeledDataset:
    """Read a numeric CSV with a header row; ``target_column`` becomes ``y``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(1, None, "empty file") from None
        if target_column not in header:
            raise MissingTarget(f"column {target_column!r} not in header")
        t = header.index(target_column)
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(line, None, f"expected {len(header)} cells, got {len(row)}")
            vals = []
            for name, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(line, name, f"not a number: {cell!r}") from None
                if not math.isfinite(v):
                    raise ParseError(line, name, f"non-finite value {cell!r}")
                vals.append(v)
            rows.append(vals)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    y = data[:, t]
    X = np.delete(data, t, axis=1)
    if task == "logistic" and not np.all((y == 0) | (y == 1)):
        raise NonBinaryTarget(f"target {target_column!r} has values outside {{0, 1}}")
    names = tuple(h for i, h in enumerate(header) if i != t)
    return LabeledDataset(X, y, names=names)


def save_csv(ds: LabeledDataset, path, target_column: str = "y") -> None:
    names = list(ds.column_names()) + [target_column]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for xi, yi in zip(ds.X, ds.y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])


# ---------------------------------------------------------------------------
# config files

_INT_KEYS = {"repetitions", "K", "train_size", "test_size", "grid_count", "base_seed", "threads"}
_SYN_KEYS = {"p": int, "n_train": int, "n_test": int, "rho": float, "noise_std": float}
_TRAIN_KEYS = {f.name: f.type for f in fields(TrainConfig)}


def _coerce(kind, raw):
    if kind in (int, "int"):
        return int(raw)
    if kind in (float, "float"):
        return float(raw)
    if kind in (bool, "bool"):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise BadConfig(f"not a boolean: {raw!r}")
    return raw


def config_from_mapping(items: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from flat string key/value pairs.

    Keys are the config field names plus the synthetic design (``p``,
    ``n_train``, ``n_test``, ``rho``, ``noise_std``), the training settings
    (``lr``, ``max_epochs``, ...) and ``dataset`` (a key of
    :data:`BENCHMARK_SPLITS` supplying default train/test sizes).
    """
    top, syn, train = {}, {}, {}
    dataset = None
    for key, raw in items.items():
        raw = str(raw).strip()
        try:
            if key in _SYN_KEYS:
                syn[key] = _SYN_KEYS[key](raw)
            elif key in _TRAIN_KEYS and key != "seed":
                train[key] = _coerce(_TRAIN_KEYS[key], raw)
            elif key in _INT_KEYS:
                top[key] = int(raw)
            elif key == "grid_ratio":
                top[key] = float(raw)
            elif key == "methods":
                top[key] = tuple(m.strip() for m in raw.split(",") if m.strip())
            elif key in ("kind", "data_path", "target_column", "output_path"):
                top[key] = raw
            elif key == "dataset":
                dataset = raw
            else:
                raise BadConfig(f"unknown config key {key!r}")
        except ValueError as exc:
            if isinstance(exc, BadConfig):
                raise
            raise BadConfig(f"bad value for {key!r}: {raw!r}") from None
    if dataset is not None:
        if dataset not in BENCHMARK_SPLITS:
            raise BadConfig(f"unknown dataset {dataset!r}")
        top.setdefault("train_size", BENCHMARK_SPLITS[dataset][0])
        top.setdefault("test_size", BENCHMARK_SPLITS[dataset][1])
    kind = top.get("kind", "synthetic_linear")
    if kind.startswith("synthetic"):
        top["synthetic"] = SyntheticConfig(logistic=kind == "synthetic_logistic", **syn)
    elif syn:
        raise BadConfig(f"synthetic keys {sorted(syn)} given for {kind}")
    if train:
        top["train_cfg"] = TrainConfig(**train)
    return ExperimentConfig(**top)


def read_config_items(path) -> dict:
    """Raw ``key -> value`` strings of a flat ``key = value`` file; ``#`` starts a comment."""
    items = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadConfig(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        items[key.strip()] = value.strip()
    return items


def load_config(path) -> ExperimentConfig:
    return config_from_mapping(read_config_items(path))


# ---------------------------------------------------------------------------
# running

def _draw(cfg: ExperimentConfig, seed: int, dataset: Optional[LabeledDataset]):
    if cfg.kind.startswith("synthetic"):
        return simulate(replace(cfg.synthetic, seed=seed))
    perm = rng(seed).permutation(dataset.n)
    tr = np.sort(perm[: cfg.train_size])
    te = np.sort(perm[cfg.train_size: cfg.train_size + cfg.test_size])
    return dataset.subset(tr), dataset.subset(te)


def fit_method(method, train, task, grid, folds, cfg: ExperimentConfig, seed: int):
    tcfg = replace(cfg.train_cfg, seed=seed)
    if method == "statistical":
        return cv_statistical_lasso(train, task, cfg.K, grid, folds=folds)
    if method == "standard_neural":
        return fit_standard(train, task, grid, tcfg)
    if method == "restricted_neural":
        return fit_restricted(train, task, grid, cfg.K, tcfg, folds=folds)
    if method == "voting_neural":
        return fit_voting(train, task, grid, cfg.K, tcfg, folds=folds)
    raise BadConfig(f"unknown method {method!r}")


_RECOVERABLE = (NeuroLassoError, ArithmeticError, np.linalg.LinAlgError, ValueError)


def run_repetition(cfg: ExperimentConfig, rep: int, dataset: Optional[LabeledDataset] = None):
    """Fit and score every configured method on repetition ``rep``.

    Returns ``(rep, seed, {method: metrics dict}, [failure tuples])``.
    """
    seed = mix_seed(cfg.base_seed, rep)
    results, failures = {}, []
    try:
        train, test = _draw(cfg, seed, dataset)
        std, _ = standardize(train, cfg.task)
        grid = lambda_grid(std, cfg.task, cfg.grid_count, cfg.grid_ratio)
        folds = make_folds(train.n, cfg.K, mix_seed(seed, 0))
    except _RECOVERABLE as exc:
        return rep, seed, results, [(rep, seed, "*", f"{type(exc).__name__}: {exc}")]
    for method in cfg.methods:
        try:
            model = fit_method(method, train, cfg.task, grid, folds, cfg, mix_seed(seed, 1))
            results[method] = evaluate(model, test).as_dict()
        except _RECOVERABLE as exc:
            failures.append((rep, seed, method, f"{type(exc).__name__}: {exc}"))
    return rep, seed, results, failures


def _run_chunk(args):
    cfg, reps, dataset = args
    return [run_repetition(cfg, r, dataset) for r in reps]


def run_experiment(cfg: ExperimentConfig) -> ReportTable:
    start = time.perf_counter()
    dataset = None
    if cfg.kind.startswith("real"):
        dataset = load_csv(cfg.data_path, cfg.target_column, cfg.task)
        if cfg.train_size + cfg.test_size > dataset.n:
            raise BadConfig(f"train_size + test_size exceeds the {dataset.n} rows available")
    reps = list(range(cfg.repetitions))
    if cfg.threads > 1 and len(reps) > 1:
        chunks = [reps[i::cfg.threads] for i in range(cfg.threads)]
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            outs = [o for part in pool.map(_run_chunk, [(cfg, c, dataset) for c in chunks if c])
                    for o in part]
    else:
        outs = _run_chunk((cfg, reps, dataset))
    outs.sort(key=lambda o: o[0])
    failures = [f for o in outs for f in o[3]]
    failed_reps = {f[0] for f in failures}
    for f in failures:
        log.warning("repetition %d (seed %d) %s failed: %s", *f)
    if len(failed_reps) > 0.1 * cfg.repetitions:
        raise ExperimentAborted(
            f"{len(failed_reps)} of {cfg.repetitions} repetitions failed; first: {failures[0]}")
    table = aggregate(cfg, outs)
    table.failures = failures
    table.metadata.update(config=_config_echo(cfg), base_seed=cfg.base_seed,
                          wall_clock_s=time.perf_counter() - start)
    return table


def aggregate(cfg: ExperimentConfig, outs) -> ReportTable:
    """Mean/SD per (method, metric) and paired tests against the statistical lasso."""
    per_rep = {}
    for method in cfg.methods:
        for metric in METRIC_ORDER:
            vals = {o[0]: o[2][method][metric] for o in outs
                    if method in o[2] and metric in o[2][method]}
            if vals:
                per_rep[(method, metric)] = vals
    rows = []
    for method in METHOD_ORDER:
        if method not in cfg.methods:
            continue
        for metric in METRIC_ORDER:
            vals = per_rep.get((method, metric))
            if not vals:
                continue
            arr = np.array([vals[r] for r in sorted(vals)])
            sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
            p = None
            base = per_rep.get(("statistical", metric))
            if method != "statistical" and base:
                common = sorted(set(vals) & set(base))
                if len(common) >= 2:
                    try:
                        _, p = paired_t_test([vals[r] for r in common], [base[r] for r in common])
                    except ZeroVariance:
                        p = float("nan")
            rows.append(ReportRow(method, metric, float(arr.mean()), sd, p, star_for(p), arr.size))
    return ReportTable(rows=rows, per_rep=per_rep)


def _config_echo(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d.pop("threads")
    return d


# ---------------------------------------------------------------------------
# output

CSV_HEADER = ("method", "metric", "mean", "sd", "p_value", "star")


def _fmt_p(p):
    return "" if p is None else ("nan" if not math.isfinite(p) else f"{p:.4f}")


def render_report(table: ReportTable, fmt: str = "csv") -> str:
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in table.rows:
            w.writerow([r.method, r.metric, f"{r.mean:.3f}", f"{r.sd:.3f}", _fmt_p(r.p_value),
                        r.star])
        return buf.getvalue()
    if fmt != "markdown":
        raise ValueError(f"unknown format {fmt!r}")
    metrics = [m for m in METRIC_ORDER if any(r.metric == m for r in table.rows)]
    for metric in metrics:
        buf.write(f"### {metric}\n\n| method | mean (sd) | p-value |\n|---|---|---|\n")
        for r in table.rows:
            if r.metric == metric:
                buf.write(f"| {r.method} | {r.mean:.3f}{r.star} ({r.sd:.3f}) | "
                          f"{_fmt_p(r.p_value)} |\n")
        buf.write("\n")
    return buf.getvalue()


def write_report(table: ReportTable, path, fmt: str = "csv") -> None:
    Path(path).write_text(render_report(table, fmt), encoding="utf-8")


def read_report_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_failures(table: ReportTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("rep", "seed", "method", "error"))
        w.writerows(table.failures)
