"""Statistical lasso by coordinate descent.

Draw one synthetic problem with four relevant predictors out of twenty,
walk the warm-started penalty path, then let 5-fold cross-validation pick
the penalty. Run with ``python demos/01_coordinate_descent.py``.
"""

import numpy as np

from neurolasso.classic import cv_statistical_lasso, lambda_grid, lasso_path
from neurolasso.data import standardize
from neurolasso.datagen import SyntheticConfig, simulate
from neurolasso.metrics import evaluate

train, test = simulate(SyntheticConfig(p=20, n_train=50, seed=3))
std, _ = standardize(train)
grid = lambda_grid(std, "linear", count=100, ratio=1e-3)
print(f"lambda_max = {grid.lambda_max:.4f}; the all-zero model is optimal from there up")

# %% The path: the active set grows as the penalty decreases
betas, _ = lasso_path(std, "linear", grid.values)
for i in (0, 10, 25, 50, 99):
    nz = np.flatnonzero(betas[i])
    print(f"lambda = {grid.values[i]:8.4f}: {nz.size:2d} active -> {nz.tolist()}")

# %% KKT certificate at one point of the path
i = 40
lam, beta = grid.values[i], betas[i]
g = 2 / std.n * std.X.T @ (std.y - std.X @ beta)
print(f"\nat lambda={lam:.4f}: max |grad| on zero coords = {np.abs(g[beta == 0]).max():.4f} "
      f"(must be <= lambda)")

# %% Cross-validated choice, refit on all of the training data
model = cv_statistical_lasso(train, "linear", K=5, grid=grid, seed=3)
m = evaluate(model, test)
print(f"\nCV picked lambda = {model.lam:.4f} (grid index {model.info['lambda_index']})")
print(f"true support     : {np.flatnonzero(test.truth_support).tolist()}")
print(f"selected support : {np.flatnonzero(model.support).tolist()}")
print(f"test MSE {m.mse:.3f}, precision {m.precision:.3f}, recall {m.recall:.3f}")
