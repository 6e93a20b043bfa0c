"""Independent reference computations used as test oracles.

Nothing here imports the package's solvers; each routine is a direct,
slow transcription of the defining formula or a different algorithm.
"""

import math

import numpy as np


def standardize_ref(X, y, center_y=True):
    mu = X.mean(axis=0)
    sd = np.sqrt(((X - mu) ** 2).mean(axis=0))
    ym = y.mean() if center_y else 0.0
    return (X - mu) / sd, y - ym, mu, sd, ym


def lasso_obj(X, y, beta, lam):
    r = y - X @ beta
    return r @ r / len(y) + lam * np.abs(beta).sum()


def fista_linear(X, y, lam, iters=200_000, tol=1e-15):
    """Accelerated proximal gradient on (1/N)||y - Xb||^2 + lam ||b||_1."""
    n, p = X.shape
    L = 2.0 * np.linalg.eigvalsh(X.T @ X / n).max()
    b = np.zeros(p)
    z = b.copy()
    t = 1.0
    for _ in range(iters):
        g = -2.0 / n * X.T @ (y - X @ z)
        u = z - g / L
        nb = np.sign(u) * np.maximum(np.abs(u) - lam / L, 0.0)
        nt = (1 + math.sqrt(1 + 4 * t * t)) / 2
        z = nb + (t - 1) / nt * (nb - b)
        if np.max(np.abs(nb - b)) < tol:
            b = nb
            break
        b, t = nb, nt
    return b


def logistic_obj(X, y, beta, b0, lam):
    eta = X @ beta + b0
    return np.mean(np.logaddexp(0.0, eta) - y * eta) + lam * np.abs(beta).sum()


def newton_logistic(X, y, iters=100):
    """Damped Newton for the unpenalized logistic fit with an intercept."""
    A = np.column_stack([np.ones(len(y)), X])
    th = np.zeros(A.shape[1])
    f = lambda t: np.mean(np.logaddexp(0.0, A @ t) - y * (A @ t))
    for _ in range(iters):
        pr = 1 / (1 + np.exp(-(A @ th)))
        g = A.T @ (pr - y) / len(y)
        if np.linalg.norm(g) < 1e-13:
            break
        H = A.T @ (A * (pr * (1 - pr))[:, None]) / len(y)
        d = np.linalg.solve(H, g)
        s = 1.0
        while f(th - s * d) > f(th) and s > 1e-12:
            s /= 2
        th = th - s * d
    return th[1:], th[0]


def t_two_sided_by_quadrature(t, df):
    """P(|T| >= |t|) by adaptive quadrature of the Student t density (mpmath)."""
    import mpmath as mp

    mp.mp.dps = 40
    nu = mp.mpf(df)
    c = mp.gamma((nu + 1) / 2) / (mp.sqrt(nu * mp.pi) * mp.gamma(nu / 2))
    dens = lambda x: c * (1 + x * x / nu) ** (-(nu + 1) / 2)
    return float(2 * mp.quad(dens, [abs(mp.mpf(t)), mp.inf]))
