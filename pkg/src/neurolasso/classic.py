"""Statistical lasso: coordinate descent, penalty grids and K-fold selection.

Objectives share a single convention for both tasks::

    linear:    (1/N) ||y - X b||^2 + lam * ||b||_1
    logistic:  (1/N) sum[log(1 + exp(eta)) - y * eta] + lam * ||b||_1,
               eta = X b + b0

The linear loss is not halved, so the exact coordinate minimizer
soft-thresholds at ``lam / 2``. The logistic quadratic approximation
``(1/2N) sum v (z - eta)^2`` already carries the 1/2, so its threshold is
``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _fast
from .data import FittedModel, LabeledDataset, destandardize, make_folds, sigmoid, standardize
from .errors import BadK, FoldTooSmall, NoConvergence, SingleClass

IRLS_MIN_WEIGHT = 1e-5


def soft_threshold(x, t):
    """``sign(x) * max(|x| - t, 0)``; works on scalars and arrays."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be non-negative")
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def log1pexp(z):
    """Stable ``log(1 + exp(z))``."""
    return np.logaddexp(0.0, z)


def lasso_objective(X, y, beta, lam, task="linear", intercept=0.0):
    eta = X @ beta + intercept
    if task == "linear":
        loss = np.mean((y - eta) ** 2)
    else:
        loss = np.mean(log1pexp(eta) - y * eta)
    return float(loss + lam * np.sum(np.abs(beta)))


def validation_error(task, y, pred):
    """MSE for linear predictions, binary cross-entropy for probabilities.

    ``pred`` may be a matrix with one column per model; the result is then a
    vector of per-column errors.
    """
    if pred.ndim == 2:
        y = y[:, None]
    if task == "linear":
        return np.mean((y - pred) ** 2, axis=0)
    pred = np.clip(pred, 1e-15, 1 - 1e-15)
    return -np.mean(y * np.log(pred) + (1 - y) * np.log1p(-pred), axis=0)


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly decreasing penalty values starting at ``lambda_max``."""

    values: np.ndarray
    ratio: float = 1e-3

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0 or np.any(v <= 0) or np.any(np.diff(v) >= 0):
            raise ValueError("grid values must be positive and strictly decreasing")
        object.__setattr__(self, "values", v)

    @property
    def count(self) -> int:
        return self.values.size

    @property
    def lambda_max(self) -> float:
        return float(self.values[0])

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(self.values)


def lambda_max(ds: LabeledDataset, task: str = "linear") -> float:
    """Smallest penalty at which the all-zero coefficient vector is optimal."""
    X, y = ds.X, ds.y
    n = X.shape[0]
    if task == "linear":
        return float(np.max(np.abs(2.0 / n * (X.T @ y))))
    return float(np.max(np.abs(X.T @ (y - 0.5)) / n))


def lambda_grid(ds: LabeledDataset, task: str = "linear", count: int = 100,
                ratio: float = 1e-3) -> LambdaGrid:
    """Log-equispaced grid from ``lambda_max`` down to ``ratio * lambda_max``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    lmax = lambda_max(ds, task)
    if lmax <= 0:
        raise ValueError("lambda_max is zero: response is orthogonal to every column")
    if count == 1:
        return LambdaGrid(np.array([lmax]), ratio)
    return LambdaGrid(lmax * ratio ** (np.arange(count) / (count - 1)), ratio)


def _check_binary(y):
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("logistic response must be 0/1")
    if y.min() == y.max():
        raise SingleClass("logistic response has a single class")


def _cd_linear_core(G, c, col_sq, lam, beta, tol, max_sweeps):
    """Covariance-update coordinate descent (compiled; see ``_fast.cd_linear_core``)."""
    beta = np.ascontiguousarray(beta, dtype=float)
    return _fast.cd_linear_core(np.ascontiguousarray(G), np.ascontiguousarray(c),
                                np.ascontiguousarray(col_sq), float(lam), beta, float(tol),
                                int(max_sweeps))


def cd_linear(ds: LabeledDataset, lam: float, tol: float = 1e-7, max_sweeps: int = 10_000,
              beta_init=None) -> FittedModel:
    """Lasso coordinate descent for a standardized, centered linear problem.

    Raises
    ------
    NoConvergence
        If ``max_sweeps`` is exhausted; the exception carries the last iterate.
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    X, y = ds.X, ds.y
    n = X.shape[0]
    G = X.T @ X / n
    c = X.T @ y / n
    beta = np.zeros(X.shape[1]) if beta_init is None else np.array(beta_init, dtype=float)
    beta, sweeps, ok = _cd_linear_core(G, c, np.diag(G).copy(), lam, beta, tol, max_sweeps)
    model = FittedModel("linear", beta, 0.0, float(lam), "statistical", info={"sweeps": sweeps})
    if not ok:
        raise NoConvergence(max_sweeps, model)
    return model


def _weighted_cd(X, v, r, beta, b0, lam, d, tol, max_sweeps):
    """Coordinate descent on ``(1/2N) sum v r^2 + lam ||beta||_1`` in place on ``r``."""
    n = X.shape[0]
    vsum = v.sum()
    p = beta.shape[0]
    full = np.arange(p)
    coords = full
    for _ in range(max_sweeps):
        max_delta = 0.0
        for j in coords:
            old = beta[j]
            xj = X[:, j]
            rho = (v * xj) @ r / n + d[j] * old
            new = np.sign(rho) * max(abs(rho) - lam, 0.0) / d[j]
            if new != old:
                delta = new - old
                r -= xj * delta
                beta[j] = new
                max_delta = max(max_delta, abs(delta))
        shift = (v @ r) / vsum
        if shift != 0.0:
            b0 += shift
            r -= shift
            max_delta = max(max_delta, abs(shift))
        if coords is full:
            if max_delta < tol:
                return beta, b0, True
            coords = np.flatnonzero(beta)
        elif max_delta < tol:
            coords = full
    return beta, b0, False


def cd_logistic(ds: LabeledDataset, lam: float, tol: float = 1e-7, max_outer: int = 100,
                beta_init=None, intercept_init=None, max_inner: int = 10_000) -> FittedModel:
    """Penalized logistic regression by iteratively reweighted coordinate descent.

    Each outer step forms the quadratic approximation at the current
    ``(beta, b0)`` with weights ``p(1 - p)`` (clamped below at 1e-5) and
    solves it by weighted coordinate descent with an unpenalized intercept.
    A step that raises the penalized objective is halved until it does not.
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    X, y = ds.X, ds.y
    _check_binary(y)
    n, p = X.shape
    beta = np.zeros(p) if beta_init is None else np.array(beta_init, dtype=float)
    if intercept_init is None:
        ybar = y.mean()
        b0 = float(np.log(ybar / (1 - ybar)))
    else:
        b0 = float(intercept_init)
    obj = lasso_objective(X, y, beta, lam, "logistic", b0)
    for it in range(1, max_outer + 1):
        eta = X @ beta + b0
        prob = sigmoid(eta)
        v = np.maximum(prob * (1 - prob), IRLS_MIN_WEIGHT)
        z = eta + (y - prob) / v
        d = (v @ (X * X)) / n
        r = z - eta
        new_beta, new_b0, _ = _weighted_cd(X, v, r, beta.copy(), b0, lam, d, tol, max_inner)
        new_obj = lasso_objective(X, y, new_beta, lam, "logistic", new_b0)
        step = 1.0
        while new_obj > obj + 1e-12 * max(1.0, abs(obj)) and step > 1e-6:
            step *= 0.5
            cand_beta = beta + step * (new_beta - beta)
            cand_b0 = b0 + step * (new_b0 - b0)
            # halving an l1 step can leave tiny nonzeros; keep zeros where both ends are zero
            cand_beta[(beta == 0) & (new_beta == 0)] = 0.0
            cand_obj = lasso_objective(X, y, cand_beta, lam, "logistic", cand_b0)
            if cand_obj <= obj:
                new_beta, new_b0, new_obj = cand_beta, cand_b0, cand_obj
                break
        change = max(np.max(np.abs(new_beta - beta), initial=0.0), abs(new_b0 - b0))
        beta, b0, obj = new_beta, new_b0, new_obj
        if change < tol:
            return FittedModel("logistic", beta, b0, float(lam), "statistical",
                               info={"outer_iterations": it})
    raise NoConvergence(max_outer, FittedModel("logistic", beta, b0, float(lam), "statistical",
                                               info={"outer_iterations": max_outer}))


def lasso_path(ds: LabeledDataset, task: str, lambdas, tol: float = 1e-7,
               max_iter: int | None = None):
    """Warm-started fits along a decreasing sequence of penalties.

    ``max_iter`` caps sweeps per penalty (default 100_000 for the linear
    task: the small-penalty end of a p > N path converges slowly).

    Returns ``(betas, intercepts)`` with ``betas`` of shape (len(lambdas), p).
    """
    lambdas = np.asarray(lambdas, dtype=float)
    p = ds.p
    betas = np.zeros((lambdas.size, p))
    intercepts = np.zeros(lambdas.size)
    if task == "linear":
        X, y = ds.X, ds.y
        n = X.shape[0]
        G = X.T @ X / n
        c = X.T @ y / n
        col_sq = np.diag(G).copy()
        beta = np.zeros(p)
        sweeps = max_iter or 100_000
        for i, lam in enumerate(lambdas):
            beta, _, ok = _cd_linear_core(G, c, col_sq, lam, beta, tol, sweeps)
            if not ok:
                raise NoConvergence(sweeps, FittedModel("linear", beta, 0.0, float(lam),
                                                        "statistical"))
            betas[i] = beta
    else:
        beta, b0 = None, None
        for i, lam in enumerate(lambdas):
            m = cd_logistic(ds, lam, tol, max_iter or 100, beta_init=beta, intercept_init=b0)
            beta, b0 = m.beta, m.intercept
            betas[i] = beta
            intercepts[i] = b0
    return betas, intercepts


def _check_folds(ds, folds):
    sizes = folds.sizes()
    if np.any(ds.n - sizes < 2):
        raise FoldTooSmall("every training fold needs at least 2 observations")


def cv_statistical_lasso(ds: LabeledDataset, task: str = "linear", K: int = 5,
                         grid: LambdaGrid | None = None, seed: int = 0, folds=None,
                         tol: float = 1e-7) -> FittedModel:
    """Select the penalty by K-fold cross-validation and refit on all of ``ds``.

    ``ds`` is on raw scale; each fold's training part is standardized on its
    own and validation error is measured in original units (MSE for linear,
    binary cross-entropy for logistic). Ties in mean error resolve to the
    largest penalty. The returned model is destandardized and carries the
    CV curve in ``info``.
    """
    if K < 2:
        raise BadK("K must be >= 2")
    if task == "logistic":
        _check_binary(ds.y)
    std_ds, params = standardize(ds, task)
    if grid is None:
        grid = lambda_grid(std_ds, task)
    if folds is None:
        folds = make_folds(ds.n, K, seed)
    _check_folds(ds, folds)
    lambdas = grid.values
    errors = np.empty((folds.K, lambdas.size))
    for k in range(folds.K):
        tr, va = folds.indices(k)
        fold_std, fold_params = standardize(ds.subset(tr), task)
        betas, intercepts = lasso_path(fold_std, task, lambdas, tol)
        Xv = fold_params.apply(ds.X[va])
        eta = Xv @ betas.T + intercepts + fold_params.y_mean
        pred = sigmoid(eta) if task == "logistic" else eta
        errors[k] = validation_error(task, ds.y[va], pred)
    mean = errors.mean(axis=0)
    best = int(np.flatnonzero(mean <= mean.min() + 1e-12)[0])
    betas, intercepts = lasso_path(std_ds, task, lambdas[: best + 1], tol)
    model = FittedModel(task, betas[-1], float(intercepts[-1]), float(lambdas[best]),
                        "statistical",
                        info={"cv_errors": errors, "cv_mean": mean, "lambda_index": best,
                              "folds": folds})
    return destandardize(model, params)
