"""The lasso written as a one-layer network.

With ``beta = gamma * w`` and ``lambda = l1 / gamma`` the network loss
``(1/N)||y - gamma X w||^2 + l1 ||w||_1`` is the lasso objective. This demo
checks that identity numerically, then trains the network with ``gamma``
frozen at 1 and compares it with coordinate descent at the same penalty.
"""

import numpy as np

from neurolasso import network as nn
from neurolasso.classic import cd_linear, lambda_max, lasso_objective
from neurolasso.data import standardize
from neurolasso.datagen import SyntheticConfig, simulate
from neurolasso.training import TrainConfig, train_batch

train, _ = simulate(SyntheticConfig(p=10, n_train=50, seed=8))
std, _ = standardize(train)
X, y = std.X, std.y

# %% Identity of the two objectives at a random parameter point
r = np.random.default_rng(0)
par = nn.NeuralParams(r.normal(size=10), gamma=1.7, l1=0.3)
print("network loss :", float(nn.loss_linear(X, y, par)))
print("lasso value  :", lasso_objective(X, y, par.beta, float(par.lam)))

# %% The zero condition is what makes exact zeros possible
lam = 0.2 * lambda_max(std, "linear")
rep = nn.zero_condition_linear(X, y, nn.NeuralParams(np.zeros(10), 1.0, 0.0, lam))
print(f"\nat w = 0 and l1 = {lam:.3f}, coordinates that must stay zero: "
      f"{np.flatnonzero(rep.zeroed).tolist()}")

# %% Adam with per-epoch zeroing versus coordinate descent
res = train_batch(X, y, "linear", [lam], TrainConfig(max_epochs=20000, tol=1e-12),
                  gamma_frozen=True)
w = res.params.w[:, 0]
cd = cd_linear(std, lam, tol=1e-12).beta
print(f"\ntrained for {res.epochs} epochs (converged: {bool(res.converged[0])})")
print("network support:", np.flatnonzero(w).tolist())
print("CD support     :", np.flatnonzero(cd).tolist())
print(f"max |w - beta_cd| = {np.abs(w - cd).max():.2e}")
print(f"objective gap     = {lasso_objective(X, y, w, lam) - lasso_objective(X, y, cd, lam):.2e}")

# %% With gamma trainable the scale drifts, so the effective penalty l1/gamma drops
free = train_batch(X, y, "linear", [lam], TrainConfig(max_epochs=5000, tol=0.0))
g = float(free.params.gamma[0])
print(f"\ntrainable gamma after 5000 epochs: {g:.3f}; effective lambda {lam / g:.4f} "
      f"(started at {lam:.4f})")
