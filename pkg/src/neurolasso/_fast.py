"""Compiled inner loops: linear coordinate descent and batched network training.

``train_linear_batch`` mirrors ``training._train_batch_reference`` for the
linear task step for step: Adam update, zero check on the updated parameters,
then either a validation snapshot or a training-loss convergence test. Each
network of the batch is processed independently and skipped once it stops,
so the cost scales with the number of still-active networks.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _matvec(A, x, out):
    n, p = A.shape
    for i in range(n):
        s = 0.0
        for j in range(p):
            s += A[i, j] * x[j]
        out[i] = s


@njit(cache=True)
def _data_terms(use_gram, X, y, G, c, n, w, gamma, Xtr, work):
    """Fill ``Xtr`` with X^T (y - gamma X w); return (mean squared residual, w^T X^T r)."""
    p = w.shape[0]
    if use_gram:
        _matvec(G, w, work)  # work = G w (length p)
        wc = 0.0
        wGw = 0.0
        for j in range(p):
            Xtr[j] = c[j] - gamma * work[j]
            wc += w[j] * c[j]
            wGw += w[j] * work[j]
        yy = 0.0
        for i in range(y.shape[0]):
            yy += y[i] * y[i]
        rss = yy - 2.0 * gamma * wc + gamma * gamma * wGw
        return rss / n, wc - gamma * wGw
    _matvec(X, w, work)  # work = X w (length N)
    rss = 0.0
    for i in range(n):
        work[i] = y[i] - gamma * work[i]
        rss += work[i] * work[i]
    wXtr = 0.0
    for j in range(p):
        s = 0.0
        for i in range(n):
            s += X[i, j] * work[i]
        Xtr[j] = s
        wXtr += w[j] * s
    return rss / n, wXtr


@njit(cache=True)
def train_linear_batch(X, y, G, c, col_sq, use_gram, Xv, yv, l1, gamma_frozen, lr, beta1,
                       beta2, eps, max_epochs, patience, tol, validate):
    n, p = X.shape
    L = l1.shape[0]
    W = np.zeros((L, p))
    gam = np.ones(L)
    k = p + (0 if gamma_frozen else 1)
    M = np.zeros((L, k))
    V = np.zeros((L, k))
    bestW = np.zeros((L, p))
    bestG = np.ones(L)
    best_err = np.full(L, np.inf)
    best_epoch = np.zeros(L, dtype=np.int64)
    stale = np.zeros(L, dtype=np.int64)
    converged = np.zeros(L, dtype=np.bool_)
    active = np.ones(L, dtype=np.bool_)
    prev = np.zeros(L)
    work = np.zeros(max(n, p))
    Xtr = np.zeros(p)
    g = np.zeros(k)
    nv = Xv.shape[0]
    if not validate:
        for l in range(L):
            ms, _ = _data_terms(use_gram, X, y, G, c, n, W[l], gam[l], Xtr, work)
            prev[l] = ms
    epoch = 0
    for epoch in range(1, max_epochs + 1):
        bc1 = 1.0 - beta1 ** epoch
        bc2 = 1.0 - beta2 ** epoch
        any_active = False
        for l in range(L):
            if not active[l]:
                continue
            w = W[l]
            gm = gam[l]
            # gradient at the current parameters
            _, wXtr = _data_terms(use_gram, X, y, G, c, n, w, gm, Xtr, work)
            for j in range(p):
                sgn = 0.0
                if w[j] > 0:
                    sgn = 1.0
                elif w[j] < 0:
                    sgn = -1.0
                g[j] = -2.0 * gm / n * Xtr[j] + l1[l] * sgn
            if not gamma_frozen:
                g[p] = -2.0 / n * wXtr
            for q in range(k):
                M[l, q] = beta1 * M[l, q] + (1.0 - beta1) * g[q]
                V[l, q] = beta2 * V[l, q] + (1.0 - beta2) * g[q] * g[q]
                step = lr * (M[l, q] / bc1) / (np.sqrt(V[l, q] / bc2) + eps)
                if q < p:
                    w[q] -= step
                else:
                    gm -= step
            gam[l] = gm
            # zero check on the updated parameters
            ms, _ = _data_terms(use_gram, X, y, G, c, n, w, gm, Xtr, work)
            changed = False
            for j in range(p):
                stat = 2.0 / n * gm * (Xtr[j] + gm * col_sq[j] * w[j])
                if abs(stat) <= l1[l]:
                    if w[j] != 0.0:
                        changed = True
                    w[j] = 0.0
                    M[l, j] = 0.0
                    V[l, j] = 0.0
            if validate:
                err = 0.0
                for i in range(nv):
                    s = 0.0
                    for j in range(p):
                        s += Xv[i, j] * w[j]
                    d = yv[i] - gm * s
                    err += d * d
                err /= nv
                if err < best_err[l]:
                    best_err[l] = err
                    bestW[l] = w
                    bestG[l] = gm
                    best_epoch[l] = epoch
                    stale[l] = 0
                else:
                    stale[l] += 1
                    if stale[l] >= patience:
                        active[l] = False
            else:
                if changed:
                    ms, _ = _data_terms(use_gram, X, y, G, c, n, w, gm, Xtr, work)
                pen = 0.0
                for j in range(p):
                    pen += abs(w[j])
                cur = ms + l1[l] * pen
                best_epoch[l] = epoch
                if abs(cur - prev[l]) <= tol * max(abs(prev[l]), 1e-300):
                    converged[l] = True
                    active[l] = False
                prev[l] = cur
            if active[l]:
                any_active = True
        if not any_active:
            break
    if validate:
        return bestW, bestG, best_err, best_epoch, ~active, epoch
    return W, gam, best_err, best_epoch, converged, epoch


@njit(cache=True)
def cd_linear_core(G, c, col_sq, lam, beta, tol, max_sweeps):
    """Covariance-update coordinate descent with ``G = X^T X / N``, ``c = X^T y / N``.

    Sweeps the full coordinate set, then iterates on the active set until it
    settles, and repeats until a full sweep moves no coefficient by ``tol``.
    Returns ``(beta, sweeps, converged)``; ``beta`` is updated in place.
    """
    p = c.shape[0]
    half = 0.5 * lam
    q = G @ beta
    sweeps = 0
    full = np.arange(p)
    coords = full
    on_full = True
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for j in coords:
            old = beta[j]
            rho = c[j] - q[j] + col_sq[j] * old
            mag = abs(rho) - half
            new = 0.0
            if mag > 0.0:
                new = (mag if rho > 0 else -mag) / col_sq[j]
            if new != old:
                delta = new - old
                for i in range(p):
                    q[i] += G[i, j] * delta
                beta[j] = new
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if on_full:
            if max_delta < tol:
                return beta, sweeps, True
            coords = np.flatnonzero(beta)
            on_full = False
            if coords.size == 0:
                coords = full
                on_full = True
        elif max_delta < tol:
            coords = full
            on_full = True
    return beta, sweeps, False
