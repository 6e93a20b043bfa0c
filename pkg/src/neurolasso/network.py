"""Lasso as a one-layer network: forward passes, losses, gradients, zeroing, Adam.

The network output is ``gamma * X @ w`` (linear) or
``sigmoid(gamma * X @ w + b0)`` (logistic) and the loss adds
``l1 * ||w||_1``. With ``beta = gamma * w`` and ``lam = l1 / gamma`` the loss
is the lasso objective of :mod:`neurolasso.classic`.

Every kernel accepts either a single parameter set (``w`` of shape ``(p,)``
and scalar ``gamma``/``b0``/``l1``) or a batch of ``L`` independent networks
(``w`` of shape ``(p, L)`` and length-``L`` vectors). Batches let one
training loop sweep an entire penalty grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .classic import log1pexp
from .data import sigmoid
from .errors import DimensionMismatch


@dataclass(frozen=True)
class NeuralParams:
    w: np.ndarray
    gamma: np.ndarray | float = 1.0
    b0: np.ndarray | float = 0.0
    l1: np.ndarray | float = 0.0
    gamma_frozen: bool = False

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim not in (1, 2):
            raise DimensionMismatch("w must be 1-D or 2-D")
        batch = w.shape[1:]
        object.__setattr__(self, "w", w)
        for name in ("gamma", "b0", "l1"):
            val = getattr(self, name)
            if batch:
                if not (isinstance(val, np.ndarray) and val.shape == batch
                        and val.dtype == float):
                    val = np.broadcast_to(np.asarray(val, dtype=float), batch).copy()
            else:
                val = float(val)
            object.__setattr__(self, name, val)
        if np.any(np.asarray(self.l1) < 0):
            raise ValueError("l1 must be non-negative")

    @classmethod
    def initial(cls, p, l1, gamma_frozen=False):
        """Zero weights, ``gamma = 1``, ``b0 = 0``; a batch if ``l1`` is a vector."""
        l1 = np.asarray(l1, dtype=float)
        shape = (p,) + l1.shape
        return cls(np.zeros(shape), 1.0, 0.0, l1, gamma_frozen)

    @property
    def beta(self):
        return self.w * self.gamma

    @property
    def lam(self):
        # the equivalent lasso penalty; infinite when gamma is 0
        with np.errstate(divide="ignore"):
            return np.asarray(self.l1) / np.asarray(self.gamma)

    def column(self, i) -> "NeuralParams":
        """Extract member ``i`` of a batch as an unbatched parameter set."""
        return NeuralParams(self.w[:, i].copy(), self.gamma[i], self.b0[i], self.l1[i],
                            self.gamma_frozen)


@dataclass(frozen=True)
class Gradient:
    w: np.ndarray
    gamma: np.ndarray | float
    b0: Optional[np.ndarray | float] = None


@dataclass(frozen=True)
class ZeroCheckReport:
    stat: np.ndarray
    threshold: np.ndarray | float
    zeroed: np.ndarray
    subgradient_bound: float = 1.0


def _check(X, y, params):
    if X.shape[1] != params.w.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[1]} columns, w has {params.w.shape[0]} rows")
    if y is not None and y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows, y has {y.shape[0]}")


def _as_col(y, w):
    return y if w.ndim == 1 else y[:, None]


def forward_linear(X, params: NeuralParams):
    _check(X, None, params)
    return (X @ params.w) * params.gamma


def loss_linear(X, y, params: NeuralParams):
    _check(X, y, params)
    r = _as_col(y, params.w) - (X @ params.w) * params.gamma
    return np.mean(r * r, axis=0) + params.l1 * np.abs(params.w).sum(axis=0)


def grad_linear(X, y, params: NeuralParams) -> Gradient:
    """Gradient of :func:`loss_linear`; the penalty subgradient at ``w_j = 0`` is 0."""
    _check(X, y, params)
    n = X.shape[0]
    Xw = X @ params.w
    r = _as_col(y, params.w) - Xw * params.gamma
    gw = (-2.0 / n) * (X.T @ r) * params.gamma + params.l1 * np.sign(params.w)
    gg = (-2.0 / n) * np.sum(Xw * r, axis=0)
    return Gradient(gw, gg)


def _eta(X, params):
    return (X @ params.w) * params.gamma + params.b0


def forward_logistic(X, params: NeuralParams):
    _check(X, None, params)
    return sigmoid(_eta(X, params))


def loss_logistic(X, y, params: NeuralParams):
    """Mean logistic loss in ``log(1 + e^eta) - y * eta`` form plus the l1 term."""
    _check(X, y, params)
    eta = _eta(X, params)
    data = np.mean(log1pexp(eta) - _as_col(y, params.w) * eta, axis=0)
    return data + params.l1 * np.abs(params.w).sum(axis=0)


def grad_logistic(X, y, params: NeuralParams) -> Gradient:
    _check(X, y, params)
    n = X.shape[0]
    Xw = X @ params.w
    resid = sigmoid(Xw * params.gamma + params.b0) - _as_col(y, params.w)
    gw = (X.T @ resid) * (params.gamma / n) + params.l1 * np.sign(params.w)
    gg = np.sum(Xw * resid, axis=0) / n
    gb = np.sum(resid, axis=0) / n
    return Gradient(gw, gg, gb)


def zero_condition_linear(X, y, params: NeuralParams) -> ZeroCheckReport:
    """Per-coordinate statistic ``(2/N) gamma X_j^T (y - gamma X w*_j)``.

    ``w*_j`` is ``w`` with coordinate ``j`` zeroed; its fit is recovered from
    the full fit by adding back the rank-one term ``gamma X_j w_j``.
    """
    _check(X, y, params)
    n = X.shape[0]
    g = params.gamma
    r = _as_col(y, params.w) - (X @ params.w) * g
    col_sq = np.einsum("ij,ij->j", X, X)
    inner = X.T @ r + g * (col_sq * params.w.T).T
    stat = (2.0 / n) * g * inner
    return ZeroCheckReport(stat, params.l1, np.abs(stat) <= params.l1)


def zero_condition_logistic(X, y, params: NeuralParams) -> ZeroCheckReport:
    """Per-coordinate statistic ``(gamma/N) X_j^T (y - sigmoid(gamma X w*_j + b0))``."""
    _check(X, y, params)
    n, p = X.shape
    g = params.gamma
    eta = _eta(X, params)
    yy = _as_col(y, params.w)
    stat = np.empty_like(params.w)
    for j in range(p):
        xj = X[:, j]
        eta_j = eta - np.multiply.outer(xj, params.w[j] * g) if params.w.ndim == 2 \
            else eta - xj * (params.w[j] * g)
        stat[j] = xj @ (yy - sigmoid(eta_j))
    stat *= g / n
    return ZeroCheckReport(stat, params.l1, np.abs(stat) <= params.l1)


def apply_zeroing(params: NeuralParams, report: ZeroCheckReport) -> NeuralParams:
    """Set ``w_j`` to exactly 0 wherever the report flags it."""
    if not np.any(report.zeroed):
        return params
    w = params.w.copy()
    w[report.zeroed] = 0.0
    return replace(params, w=w)


@dataclass(frozen=True)
class AdamState:
    """Adam moments over the packed trainable vector ``[w, gamma?, b0?]``.

    ``gamma`` is absent when frozen; ``b0`` is present only for logistic
    networks.
    """

    m: np.ndarray
    v: np.ndarray
    step_count: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: NeuralParams, logistic: bool, **hyper):
        n = params.w.shape[0] + (not params.gamma_frozen) + bool(logistic)
        shape = (n,) + params.w.shape[1:]
        return cls(np.zeros(shape), np.zeros(shape), 0, **hyper)

    def reset(self, mask) -> "AdamState":
        """Zero both moments for the ``w`` slots flagged in ``mask``."""
        if not np.any(mask):
            return self
        m, v = self.m.copy(), self.v.copy()
        p = mask.shape[0]
        m[:p][mask] = 0.0
        v[:p][mask] = 0.0
        return replace(self, m=m, v=v)


def _pack(w, gamma, b0, gamma_frozen):
    parts = [w]
    tail = w.shape[1:]
    if not gamma_frozen:
        parts.append(np.reshape(gamma, (1,) + tail))
    if b0 is not None:
        parts.append(np.reshape(b0, (1,) + tail))
    return np.concatenate(parts, axis=0)


def adam_step(state: AdamState, params: NeuralParams, grad: Gradient, active=None):
    """One bias-corrected Adam update.

    ``active`` optionally restricts a batched update to some columns; the
    others keep their parameters and moments.

    Returns
    -------
    (AdamState, NeuralParams)
    """
    logistic = grad.b0 is not None
    g = _pack(grad.w, grad.gamma, grad.b0, params.gamma_frozen)
    if g.shape != state.m.shape:
        raise DimensionMismatch(f"gradient has shape {g.shape}, state has {state.m.shape}")
    t = state.step_count + 1
    m = state.beta1 * state.m + (1 - state.beta1) * g
    v = state.beta2 * state.v + (1 - state.beta2) * g * g
    mhat = m / (1 - state.beta1 ** t)
    vhat = v / (1 - state.beta2 ** t)
    delta = state.lr * mhat / (np.sqrt(vhat) + state.eps)
    if active is not None:
        m = np.where(active, m, state.m)
        v = np.where(active, v, state.v)
        delta = np.where(active, delta, 0.0)
    p = params.w.shape[0]
    w = params.w - delta[:p]
    k = p
    gamma, b0 = params.gamma, params.b0
    if not params.gamma_frozen:
        gamma = params.gamma - delta[k]
        k += 1
    if logistic:
        b0 = params.b0 - delta[k]
    new_state = replace(state, m=m, v=v, step_count=t)
    return new_state, replace(params, w=w, gamma=gamma, b0=b0)
