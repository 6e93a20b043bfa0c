"""Core data containers, standardization and seeded splitting.

All randomness in the package goes through :func:`rng`, which wraps numpy's
PCG64 bit generator. PCG64 output for a given 64-bit seed is fixed across
platforms and numpy versions, so fold assignments and splits are
bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import BadK, ConstantColumn, DegenerateSplit, DimensionMismatch, NonFinite

TASKS = ("linear", "logistic")
METHODS = ("statistical", "standard_neural", "restricted_neural", "voting_neural")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def rng(seed: int) -> np.random.Generator:
    """Return a PCG64-backed generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def mix_seed(base_seed: int, index: int) -> int:
    """Derive a child seed with the splitmix64 finalizer.

    ``base + golden * (index + 1)`` is injective in ``index`` modulo 2**64
    (the multiplier is odd) and the finalizer is a bijection, so distinct
    indices always yield distinct seeds.
    """
    z = (int(base_seed) + _GOLDEN * (int(index) + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class LabeledDataset:
    """Design matrix ``X`` (N x p), response ``y`` and optional true support."""

    X: np.ndarray
    y: np.ndarray
    truth_support: Optional[np.ndarray] = None
    names: Optional[tuple] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if X.shape[0] < 2 or X.shape[1] < 1:
            raise DimensionMismatch(f"need N >= 2 and p >= 1, got {X.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise NonFinite("X and y must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.truth_support is not None:
            ts = np.asarray(self.truth_support, dtype=bool).ravel()
            if ts.shape[0] != X.shape[1]:
                raise DimensionMismatch("truth_support length must equal p")
            object.__setattr__(self, "truth_support", ts)
        if self.names is not None:
            if len(self.names) != X.shape[1]:
                raise DimensionMismatch("names length must equal p")
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "LabeledDataset":
        return replace(self, X=self.X[idx], y=self.y[idx])

    def column_names(self) -> tuple:
        if self.names is not None:
            return self.names
        return tuple(f"x{j + 1}" for j in range(self.p))


@dataclass(frozen=True)
class StandardizationParams:
    col_mean: np.ndarray
    col_scale: np.ndarray
    y_mean: float = 0.0

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.col_mean.shape[0]:
            raise DimensionMismatch(
                f"X has {X.shape[-1]} columns, parameters cover {self.col_mean.shape[0]}")
        return (X - self.col_mean) / self.col_scale


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray
    K: int
    seed: int

    def indices(self, k: int):
        """Return ``(train_idx, val_idx)`` for fold ``k``."""
        mask = self.fold_of == k
        return np.flatnonzero(~mask), np.flatnonzero(mask)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_of, minlength=self.K)


@dataclass(frozen=True)
class FittedModel:
    """A sparse linear or logistic model.

    ``beta``/``intercept`` live on the standardized scale of the training
    data; ``beta_original``/``intercept_original`` apply to raw inputs.
    ``info`` carries method-specific diagnostics (CV curves, fold supports,
    warnings) and never affects predictions.
    """

    task: str
    beta: np.ndarray
    intercept: float
    lam: float
    method: str
    beta_original: Optional[np.ndarray] = None
    intercept_original: Optional[float] = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float).ravel())

    @property
    def support(self) -> np.ndarray:
        return self.beta != 0

    @property
    def p(self) -> int:
        return self.beta.shape[0]

    def decision_function(self, X) -> np.ndarray:
        """Linear predictor on raw (original-unit) inputs."""
        if self.beta_original is None:
            raise ValueError("model has not been destandardized")
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.p:
            raise DimensionMismatch(f"X has {X.shape[-1]} columns, model has {self.p}")
        return X @ self.beta_original + self.intercept_original

    def predict(self, X) -> np.ndarray:
        """Fitted responses (linear) or class-1 probabilities (logistic)."""
        eta = self.decision_function(X)
        if self.task == "logistic":
            return sigmoid(eta)
        return eta


def sigmoid(z):
    # split form avoids overflow in exp for large |z|
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def standardize(ds: LabeledDataset, task: str = "linear"):
    """Center and scale predictors so each column has mean 0 and mean square 1.

    For the linear task the response is centered too; logistic responses are
    left as 0/1 labels and ``y_mean`` is 0.

    Returns
    -------
    (LabeledDataset, StandardizationParams)
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    X = ds.X
    mean = X.mean(axis=0)
    Xc = X - mean
    scale = np.sqrt(np.mean(Xc * Xc, axis=0))
    # relative guard: a column of identical values leaves only rounding noise
    tiny = 1e-12 * np.maximum(np.abs(mean), 1.0)
    for j in np.flatnonzero(scale <= tiny):
        raise ConstantColumn(int(j))
    Xs = Xc / scale
    if task == "linear":
        y_mean = float(ds.y.mean())
        ys = ds.y - y_mean
    else:
        y_mean = 0.0
        ys = ds.y.copy()
    params = StandardizationParams(col_mean=mean, col_scale=scale, y_mean=y_mean)
    return replace(ds, X=Xs, y=ys), params


def destandardize(model: FittedModel, params: StandardizationParams) -> FittedModel:
    """Fill in original-unit coefficients and intercept."""
    if model.beta.shape != params.col_scale.shape:
        raise DimensionMismatch(
            f"model has {model.beta.shape[0]} coefficients, parameters cover "
            f"{params.col_scale.shape[0]} columns")
    beta_orig = model.beta / params.col_scale
    intercept = params.y_mean + model.intercept - float(beta_orig @ params.col_mean)
    return replace(model, beta_original=beta_orig, intercept_original=float(intercept))


def make_folds(n: int, K: int, seed: int) -> FoldAssignment:
    """Deal a seeded random permutation of ``range(n)`` round-robin into K folds."""
    if K < 2 or K > n:
        raise BadK(f"K must satisfy 2 <= K <= N, got K={K}, N={n}")
    perm = rng(seed).permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[perm] = np.arange(n) % K
    return FoldAssignment(fold_of=fold_of, K=int(K), seed=int(seed))


def train_val_split(n: int, val_fraction: float, seed: int):
    """Seeded disjoint split of ``range(n)`` into ``(train_idx, val_idx)``.

    The validation size is ``max(1, round_half_up(val_fraction * n))``.
    Both index arrays are sorted.
    """
    if not 0.0 < val_fraction < 1.0:
        raise DegenerateSplit(f"val_fraction must be in (0, 1), got {val_fraction}")
    n_val = max(1, int(np.floor(val_fraction * n + 0.5)))
    if n - n_val < 1:
        raise DegenerateSplit(f"no training rows left: N={n}, n_val={n_val}")
    perm = rng(seed).permutation(n)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])
