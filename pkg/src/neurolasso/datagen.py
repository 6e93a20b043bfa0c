"""Synthetic sparse regression problems with AR(1)-correlated Gaussian predictors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset, rng, sigmoid
from .errors import BadConfig, BadRho


def _default_pattern():
    return (1.0, 2.0, 3.0, 4.0)


@dataclass(frozen=True)
class SyntheticConfig:
    """Simulation design.

    Columns are N(0, rho^|i-j|); the response is ``X @ beta + noise`` with
    ``beta = beta_pattern`` padded with zeros to length ``p``. With
    ``logistic=True`` the response is instead a Bernoulli draw with
    probability ``sigmoid(logit_scale * X @ beta)``.
    """

    p: int = 20
    n_train: int = 50
    n_test: int = 1000
    rho: float = 0.5
    noise_std: float = 1.0
    beta_pattern: tuple = field(default_factory=_default_pattern)
    permute_columns: bool = True
    seed: int = 0
    logistic: bool = False
    logit_scale: float = 1.0

    def __post_init__(self):
        if self.p < 5 or self.p < len(self.beta_pattern):
            raise BadConfig(f"p={self.p} too small for a pattern of {len(self.beta_pattern)}")
        if self.n_train < 2 or self.n_test < 2:
            raise BadConfig("need n_train >= 2 and n_test >= 2")
        if not -1.0 < self.rho < 1.0:
            raise BadConfig(f"rho must be in (-1, 1), got {self.rho}")
        if self.noise_std < 0:
            raise BadConfig("noise_std must be non-negative")

    @property
    def beta(self) -> np.ndarray:
        b = np.zeros(self.p)
        b[: len(self.beta_pattern)] = self.beta_pattern
        return b


def ar1_covariance(p: int, rho: float) -> np.ndarray:
    """Toeplitz matrix with entries ``rho ** |i - j|``."""
    if not -1.0 < rho < 1.0:
        raise BadRho(f"|rho| must be < 1, got {rho}")
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def simulate(cfg: SyntheticConfig):
    """Draw a ``(train, test)`` pair sharing one column permutation.

    Draw order from the seeded generator is fixed: training rows, training
    noise, test rows, test noise, column permutation.
    """
    g = rng(cfg.seed)
    chol = np.linalg.cholesky(ar1_covariance(cfg.p, cfg.rho))
    beta = cfg.beta

    def draw(n):
        X = g.standard_normal((n, cfg.p)) @ chol.T
        eta = X @ beta
        if cfg.logistic:
            y = (g.random(n) < sigmoid(cfg.logit_scale * eta)).astype(float)
        else:
            y = eta + cfg.noise_std * g.standard_normal(n)
        return X, y

    Xtr, ytr = draw(cfg.n_train)
    Xte, yte = draw(cfg.n_test)
    perm = g.permutation(cfg.p) if cfg.permute_columns else np.arange(cfg.p)
    truth = (beta != 0)[perm]
    train = LabeledDataset(Xtr[:, perm], ytr, truth)
    test = LabeledDataset(Xte[:, perm], yte, truth)
    return train, test
