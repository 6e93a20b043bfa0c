"""Training strategies for the network form of the lasso.

* standard: one seeded train/validation split, every penalty on the grid
  trained with early stopping, best validation error wins.
* restricted: ``gamma`` frozen at 1, penalty chosen by K-fold CV exactly as
  the statistical lasso does, then a full-data refit.
* voting: per fold, the standard procedure with that fold as validation set;
  variables selected by a strict majority of folds are refit without penalty.

All penalties of a grid are trained simultaneously as one batch of
independent networks (see :mod:`neurolasso.network`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _fast
from . import network as nn
from .classic import LambdaGrid, _check_binary, _check_folds, lambda_grid, log1pexp, validation_error
from .data import (FittedModel, LabeledDataset, destandardize, make_folds, sigmoid, standardize,
                   train_val_split)
from .errors import BadK, DimensionMismatch, NoConvergence, SingularDesign

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 10000
    patience: int = 100
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    tol: float = 1e-9
    val_fraction: float = 0.2
    seed: int = 0
    # off: train only at the first grid value instead of sweeping the grid
    standard_sweep: bool = True

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")


@dataclass(frozen=True)
class VoteTally:
    votes: np.ndarray
    K: int
    majority_threshold: int
    selected: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "selected", self.votes >= self.majority_threshold)


def tally_votes(supports) -> VoteTally:
    """Count per-variable selections over folds; majority is ``K // 2 + 1``."""
    supports = np.asarray(supports, dtype=bool)
    K = supports.shape[0]
    return VoteTally(supports.sum(axis=0).astype(int), K, K // 2 + 1)


@dataclass
class _BatchResult:
    params: nn.NeuralParams
    val_error: np.ndarray | None
    best_epoch: np.ndarray
    epochs: int
    converged: np.ndarray


def _kernels(task):
    if task == "linear":
        return nn.grad_linear, nn.zero_condition_linear, nn.loss_linear, nn.forward_linear
    return nn.grad_logistic, nn.zero_condition_logistic, nn.loss_logistic, nn.forward_logistic


def train_batch(X, y, task, l1, cfg: TrainConfig, gamma_frozen=False, X_val=None, y_val=None):
    """Train one network per entry of ``l1``; see :func:`_train_batch_reference`.

    Linear problems run through a compiled loop with identical semantics.
    """
    if task != "linear":
        return _train_batch_reference(X, y, task, l1, cfg, gamma_frozen, X_val, y_val)
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    l1 = np.atleast_1d(np.asarray(l1, dtype=float))
    n, p = X.shape
    use_gram = p <= n
    G = X.T @ X if use_gram else np.zeros((0, 0))
    c = X.T @ y
    col_sq = np.einsum("ij,ij->j", X, X)
    validate = X_val is not None
    Xv = np.ascontiguousarray(X_val, dtype=float) if validate else np.zeros((0, p))
    yv = np.ascontiguousarray(y_val, dtype=float) if validate else np.zeros(0)
    W, gam, err, best_epoch, conv, epochs = _fast.train_linear_batch(
        X, y, G, c, col_sq, use_gram, Xv, yv, l1, gamma_frozen, cfg.lr, cfg.beta1, cfg.beta2,
        cfg.eps, cfg.max_epochs, cfg.patience, cfg.tol, validate)
    params = nn.NeuralParams(np.ascontiguousarray(W.T), gam, np.zeros(l1.size), l1, gamma_frozen)
    return _BatchResult(params, err if validate else None, best_epoch, int(epochs), conv)


def _train_batch_reference(X, y, task, l1, cfg: TrainConfig, gamma_frozen=False, X_val=None,
                           y_val=None):
    """Full-batch Adam on one network per entry of ``l1``, zeroing after every epoch.

    With a validation set each network keeps the parameters of its best
    validation epoch and stops after ``cfg.patience`` epochs without
    improvement. Without one, a network stops once the relative change of
    its training loss drops to ``cfg.tol``.
    """
    grad_fn, zero_fn, loss_fn, fwd_fn = _kernels(task)
    l1 = np.atleast_1d(np.asarray(l1, dtype=float))
    L = l1.size
    params = nn.NeuralParams.initial(X.shape[1], l1, gamma_frozen)
    state = nn.AdamState.for_params(params, task == "logistic", lr=cfg.lr, beta1=cfg.beta1,
                                    beta2=cfg.beta2, eps=cfg.eps)
    active = np.ones(L, dtype=bool)
    converged = np.zeros(L, dtype=bool)
    best_epoch = np.zeros(L, dtype=int)
    validate = X_val is not None
    if validate:
        best_err = np.full(L, np.inf)
        best = params
        stale = np.zeros(L, dtype=int)
    else:
        prev = loss_fn(X, y, params)
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        state, params = nn.adam_step(state, params, grad_fn(X, y, params), active)
        report = zero_fn(X, y, params)
        zeroed = report.zeroed & active
        if zeroed.any():
            params = nn.apply_zeroing(params, nn.ZeroCheckReport(report.stat, report.threshold,
                                                                 zeroed))
            state = state.reset(zeroed)
        if validate:
            pred = fwd_fn(X_val, params)
            err = validation_error(task, y_val, pred)
            improved = active & (err < best_err)
            if improved.any():
                best_err = np.where(improved, err, best_err)
                best = nn.NeuralParams(np.where(improved, params.w, best.w),
                                       np.where(improved, params.gamma, best.gamma),
                                       np.where(improved, params.b0, best.b0), l1, gamma_frozen)
                best_epoch[improved] = epoch
            stale = np.where(improved, 0, stale + 1)
            active &= stale < cfg.patience
        else:
            cur = loss_fn(X, y, params)
            done = active & (np.abs(cur - prev) <= cfg.tol * np.maximum(np.abs(prev), 1e-300))
            converged |= done
            best_epoch[active] = epoch
            active &= ~done
            prev = cur
        if not active.any():
            break
    if validate:
        return _BatchResult(best, best_err, best_epoch, epoch, ~active)
    return _BatchResult(params, None, best_epoch, epoch, converged)


def _grid_for(std_ds, task, grid):
    return lambda_grid(std_ds, task) if grid is None else grid


def _finish(task, params: nn.NeuralParams, std_params, method, info):
    beta = params.w * params.gamma
    intercept = params.b0 if task == "logistic" else 0.0
    lam = float(params.l1 / params.gamma) if params.gamma != 0 else float("inf")
    model = FittedModel(task, beta, float(intercept), lam, method, info=info)
    return destandardize(model, std_params)


def _pick(errors):
    # first index = largest penalty among ties
    return int(np.flatnonzero(errors <= np.min(errors) + 1e-12)[0])


def _fit_with_validation(ds, tr, va, task, l1, cfg):
    fold_std, fold_params = standardize(ds.subset(tr), task)
    X_val = fold_params.apply(ds.X[va])
    y_val = ds.y[va] - fold_params.y_mean
    res = train_batch(fold_std.X, fold_std.y, task, l1, cfg, False, X_val, y_val)
    i = _pick(res.val_error)
    return res, i, fold_params


def fit_standard(ds: LabeledDataset, task: str = "linear", grid: LambdaGrid | None = None,
                 cfg: TrainConfig = TrainConfig()) -> FittedModel:
    """Single-split training: the penalty and epoch with least validation error win."""
    if task == "logistic":
        _check_binary(ds.y)
    tr, va = train_val_split(ds.n, cfg.val_fraction, cfg.seed)
    if grid is None:
        grid = lambda_grid(standardize(ds.subset(tr), task)[0], task)
    l1 = grid.values if cfg.standard_sweep else grid.values[:1]
    res, i, fold_params = _fit_with_validation(ds, tr, va, task, l1, cfg)
    info = {"val_errors": res.val_error, "lambda_index": i, "best_epoch": int(res.best_epoch[i]),
            "l1": float(l1[i]), "train_idx": tr, "val_idx": va}
    return _finish(task, res.params.column(i), fold_params, "standard_neural", info)


def fit_restricted(ds: LabeledDataset, task: str = "linear", grid: LambdaGrid | None = None,
                   K: int = 5, cfg: TrainConfig = TrainConfig(), seed: int = 0,
                   folds=None) -> FittedModel:
    """``gamma`` fixed at 1, penalty by K-fold CV, then a full-data refit."""
    if K < 2:
        raise BadK("K must be >= 2")
    if task == "logistic":
        _check_binary(ds.y)
    std_ds, std_params = standardize(ds, task)
    grid = _grid_for(std_ds, task, grid)
    folds = make_folds(ds.n, K, seed) if folds is None else folds
    _check_folds(ds, folds)
    l1 = grid.values
    fwd = nn.forward_linear if task == "linear" else nn.forward_logistic
    errors = np.empty((folds.K, l1.size))
    unconverged = 0
    for k in range(folds.K):
        tr, va = folds.indices(k)
        fold_std, fold_params = standardize(ds.subset(tr), task)
        res = train_batch(fold_std.X, fold_std.y, task, l1, cfg, gamma_frozen=True)
        unconverged += int(np.sum(~res.converged))
        pred = fwd(fold_params.apply(ds.X[va]), res.params)
        y_val = ds.y[va] - fold_params.y_mean
        errors[k] = validation_error(task, y_val, pred)
    mean = errors.mean(axis=0)
    best = _pick(mean)
    res = train_batch(std_ds.X, std_ds.y, task, l1[best:best + 1], cfg, gamma_frozen=True)
    info = {"cv_errors": errors, "cv_mean": mean, "lambda_index": best, "folds": folds,
            "unconverged_fold_fits": unconverged, "refit_converged": bool(res.converged[0]),
            "epochs": res.epochs}
    if unconverged or not res.converged[0]:
        log.debug("restricted fit hit max_epochs in %d fold fits", unconverged)
    return _finish(task, res.params.column(0), std_params, "restricted_neural", info)


def fit_voting(ds: LabeledDataset, task: str = "linear", grid: LambdaGrid | None = None,
               K: int = 5, cfg: TrainConfig = TrainConfig(), seed: int = 0,
               folds=None) -> FittedModel:
    """Majority vote over per-fold validation-selected supports, then an unpenalized refit.

    If no variable reaches a majority the intercept-only model is returned
    with ``info["empty_majority"]`` set.
    """
    if K < 2:
        raise BadK("K must be >= 2")
    if task == "logistic":
        _check_binary(ds.y)
    if grid is None:
        grid = lambda_grid(standardize(ds, task)[0], task)
    folds = make_folds(ds.n, K, seed) if folds is None else folds
    _check_folds(ds, folds)
    supports = np.zeros((folds.K, ds.p), dtype=bool)
    chosen = np.empty(folds.K, dtype=int)
    for k in range(folds.K):
        tr, va = folds.indices(k)
        res, i, _ = _fit_with_validation(ds, tr, va, task, grid.values, cfg)
        supports[k] = res.params.w[:, i] != 0
        chosen[k] = i
    tally = tally_votes(supports)
    model = refit_unpenalized(ds, tally.selected, task)
    model.info.update(fold_supports=supports, tally=tally, fold_lambda_index=chosen, folds=folds,
                      empty_majority=not tally.selected.any())
    if not tally.selected.any():
        log.warning("voting: no variable selected by a majority of %d folds", folds.K)
    return model


def _newton_logistic(Z, y, max_iter=200, gtol=1e-8):
    """Unpenalized logistic fit with intercept by backtracking Newton."""
    n, k = Z.shape
    A = np.column_stack([np.ones(n), Z])
    ybar = y.mean()
    theta = np.zeros(k + 1)
    theta[0] = np.log(ybar / (1 - ybar))

    def loss(t):
        eta = A @ t
        return np.mean(log1pexp(eta) - y * eta)

    cur = loss(theta)
    for it in range(max_iter):
        prob = sigmoid(A @ theta)
        g = A.T @ (prob - y) / n
        if np.linalg.norm(g) < gtol:
            return theta, it
        H = (A * (prob * (1 - prob))[:, None]).T @ A / n
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError as exc:
            raise SingularDesign("singular Hessian in logistic refit") from exc
        t = 1.0
        while True:
            cand = theta - t * step
            new = loss(cand)
            if new <= cur - 1e-4 * t * (g @ step) or t < 1e-10:
                break
            t *= 0.5
        theta, cur = cand, new
    raise NoConvergence(max_iter)


def refit_unpenalized(ds: LabeledDataset, support, task: str = "linear",
                      method: str = "voting_neural") -> FittedModel:
    """Least squares (QR) or Newton logistic fit on the selected columns only."""
    support = np.asarray(support, dtype=bool)
    if support.shape != (ds.p,):
        raise DimensionMismatch("support length must equal p")
    if task == "logistic":
        _check_binary(ds.y)
    std_ds, std_params = standardize(ds, task)
    cols = np.flatnonzero(support)
    beta = np.zeros(ds.p)
    intercept = 0.0
    if cols.size:
        Z = std_ds.X[:, cols]
        if task == "linear":
            if cols.size > ds.n - 1:
                raise SingularDesign(f"{cols.size} columns but only {ds.n} observations")
            Q, R = np.linalg.qr(Z)
            diag = np.abs(np.diag(R))
            if diag.min() <= 1e-10 * diag.max():
                raise SingularDesign("selected columns are linearly dependent")
            beta[cols] = np.linalg.solve(R, Q.T @ std_ds.y)
        else:
            if np.linalg.matrix_rank(Z) < cols.size:
                raise SingularDesign("selected columns are linearly dependent")
            theta, _ = _newton_logistic(Z, std_ds.y)
            intercept = float(theta[0])
            beta[cols] = theta[1:]
    elif task == "logistic":
        ybar = std_ds.y.mean()
        intercept = float(np.log(ybar / (1 - ybar)))
    model = FittedModel(task, beta, intercept, 0.0, method)
    return destandardize(model, std_params)
