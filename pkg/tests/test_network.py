import math

import numpy as np
import pytest

from oracles import lasso_obj

from neurolasso import network as nn
from neurolasso.classic import cd_linear, cd_logistic, lambda_max
from neurolasso.data import LabeledDataset, standardize
from neurolasso.errors import DimensionMismatch


def _problem(seed, n=30, p=6, logistic=False):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, p))
    if logistic:
        y = (r.random(n) < 1 / (1 + np.exp(-X[:, 0]))).astype(float)
    else:
        y = X[:, 0] - X[:, 1] + r.normal(size=n)
        y -= y.mean()
    return X, y, r


def _params(r, p, away_from_zero=True):
    w = r.normal(size=p)
    if away_from_zero:
        w = np.where(np.abs(w) < 0.05, 0.05 * np.sign(w) + 0.05 * (w == 0), w)
    return nn.NeuralParams(w, r.uniform(0.3, 2.0), r.normal(), r.uniform(0, 0.5))


def test_forward_linear_examples():
    X = np.array([[2.0]])
    assert nn.forward_linear(X, nn.NeuralParams(np.array([3.0]))).tolist() == [6.0]
    X, _, r = _problem(0)
    assert np.all(nn.forward_linear(X, nn.NeuralParams(np.zeros(6), 1.7)) == 0)


def test_forward_linear_naive_loop():
    X, _, r = _problem(1)
    par = _params(r, 6)
    naive = [par.gamma * sum(X[i, j] * par.w[j] for j in range(6)) for i in range(X.shape[0])]
    np.testing.assert_allclose(nn.forward_linear(X, par), naive, atol=1e-12, rtol=0)


def test_dimension_checks():
    X, y, _ = _problem(0)
    with pytest.raises(DimensionMismatch):
        nn.forward_linear(X, nn.NeuralParams(np.zeros(5)))
    with pytest.raises(DimensionMismatch):
        nn.loss_linear(X, y[:-1], nn.NeuralParams(np.zeros(6)))


def test_loss_linear_examples():
    X, y, _ = _problem(2)
    assert nn.loss_linear(X, y, nn.NeuralParams(np.zeros(6), 1.3, 0, 0.4)) == pytest.approx(
        y @ y / len(y), rel=1e-15)
    perfect = nn.loss_linear(np.array([[-1.0], [1.0]]), np.array([-1.0, 1.0]),
                             nn.NeuralParams(np.array([1.0])))
    assert perfect == 0.0


def test_loss_linear_equals_lasso_objective():
    X, y, r = _problem(3)
    for _ in range(100):
        par = _params(r, 6, away_from_zero=False)
        lhs = nn.loss_linear(X, y, par)
        rhs = lasso_obj(X, y, par.gamma * par.w, par.l1 / par.gamma)
        assert abs(lhs - rhs) < 1e-12


def test_logistic_zero_weights():
    X, y, _ = _problem(4, logistic=True)
    par = nn.NeuralParams(np.zeros(6))
    assert np.all(nn.forward_logistic(X, par) == 0.5)
    assert nn.loss_logistic(X, y, par) == pytest.approx(math.log(2.0), rel=1e-15)


def test_logistic_cross_entropy_form():
    X, y, r = _problem(5, logistic=True)
    for _ in range(100):
        par = _params(r, 6, away_from_zero=False)
        prob = 1 / (1 + np.exp(-(par.gamma * X @ par.w + par.b0)))
        bce = -np.mean(y * np.log(prob) + (1 - y) * np.log(1 - prob))
        assert abs(nn.loss_logistic(X, y, par) - (bce + par.l1 * np.abs(par.w).sum())) < 1e-10


def test_logistic_loss_stable_for_large_margins():
    X = np.array([[1.0], [-1.0]])
    y = np.array([0.0, 1.0])
    for eta in (1e2, 1e3, 1e4):
        val = nn.loss_logistic(X, y, nn.NeuralParams(np.array([eta])))
        assert np.isfinite(val) and val == pytest.approx(eta, rel=1e-12)


def _fd(f, x, h=1e-6):
    x = np.array(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        up, dn = x.copy(), x.copy()
        up[i] += h
        dn[i] -= h
        out[i] = (f(up) - f(dn)) / (2 * h)
    return out


@pytest.mark.parametrize("logistic", [False, True])
def test_gradient_matches_finite_differences(logistic):
    X, y, r = _problem(6, logistic=logistic)
    loss = nn.loss_logistic if logistic else nn.loss_linear
    grad = nn.grad_logistic if logistic else nn.grad_linear
    for _ in range(20):
        par = _params(r, 6)
        g = grad(X, y, par)
        flat = np.concatenate([par.w, [par.gamma, par.b0]])

        def f(v):
            return loss(X, y, nn.NeuralParams(v[:6], v[6], v[7], par.l1))
        num = _fd(f, flat)
        ana = np.concatenate([g.w, [g.gamma, g.b0 if logistic else 0.0]])
        rel = np.abs(ana - num) / np.maximum(np.abs(num), 1e-8)
        assert rel.max() < 1e-5


def test_grad_linear_special_points():
    X, y, _ = _problem(7)
    g = nn.grad_linear(X, y, nn.NeuralParams(np.zeros(6), 1.5))
    np.testing.assert_allclose(g.w, -2 * 1.5 / len(y) * X.T @ y, rtol=1e-14)
    w = np.linspace(-1, 1, 6)
    g0 = nn.grad_linear(X, y, nn.NeuralParams(w, 0.0))
    assert np.all(g0.w == 0)
    assert g0.gamma == pytest.approx(-2 / len(y) * (X @ w) @ y, rel=1e-14)
    assert g0.b0 is None


def test_subgradient_zero_at_origin():
    X, y, _ = _problem(8)
    g = nn.grad_linear(X, y, nn.NeuralParams(np.zeros(6), 1.0, 0.0, 5.0))
    np.testing.assert_allclose(g.w, -2 / len(y) * X.T @ y)


def test_batched_kernels_match_columns():
    X, y, r = _problem(9, logistic=True)
    W = r.normal(size=(6, 4))
    batch = nn.NeuralParams(W, r.uniform(0.5, 1.5, 4), r.normal(size=4), r.uniform(0, 1, 4))
    for fns in ((nn.loss_linear, nn.grad_linear, nn.zero_condition_linear),
                (nn.loss_logistic, nn.grad_logistic, nn.zero_condition_logistic)):
        loss, grad, zc = fns
        L, G, Z = loss(X, y, batch), grad(X, y, batch), zc(X, y, batch)
        for i in range(4):
            col = batch.column(i)
            assert L[i] == pytest.approx(loss(X, y, col), rel=1e-13)
            np.testing.assert_allclose(G.w[:, i], grad(X, y, col).w, rtol=1e-12, atol=1e-15)
            np.testing.assert_allclose(Z.stat[:, i], zc(X, y, col).stat, rtol=1e-12, atol=1e-15)


def test_zero_condition_linear_definition():
    X, y, r = _problem(10)
    par = _params(r, 6)
    rep = nn.zero_condition_linear(X, y, par)
    for j in range(6):
        wj = par.w.copy()
        wj[j] = 0.0
        ref = 2 / len(y) * par.gamma * X[:, j] @ (y - par.gamma * X @ wj)
        assert rep.stat[j] == pytest.approx(ref, rel=1e-10, abs=1e-13)
    assert np.array_equal(rep.zeroed, np.abs(rep.stat) <= par.l1)
    assert rep.subgradient_bound == 1.0


def test_zero_condition_linear_orthogonal_column():
    X = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    y = np.array([1.0, 1.0, -1.0, -1.0])  # equals column 0, orthogonal to column 1
    rep = nn.zero_condition_linear(X, y, nn.NeuralParams(np.array([0.5, 0.0]), 1.0, 0, 0.1))
    assert rep.stat[1] == 0.0 and rep.zeroed[1]
    rep0 = nn.zero_condition_linear(X, y, nn.NeuralParams(np.array([0.5, 0.0]), 1.0, 0, 0.0))
    assert rep0.zeroed[1] and not rep0.zeroed[0]


def test_zero_condition_logistic_definition():
    X, y, r = _problem(11, logistic=True)
    par = _params(r, 6)
    rep = nn.zero_condition_logistic(X, y, par)
    for j in range(6):
        wj = par.w.copy()
        wj[j] = 0.0
        prob = 1 / (1 + np.exp(-(par.gamma * X @ wj + par.b0)))
        ref = par.gamma / len(y) * X[:, j] @ (y - prob)
        assert rep.stat[j] == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_zero_condition_logistic_special_points():
    X, y, r = _problem(12, logistic=True)
    rep = nn.zero_condition_logistic(X, y, nn.NeuralParams(r.normal(size=6), 0.0, 0.3, 0.01))
    assert np.all(rep.stat == 0) and rep.zeroed.all()
    std = standardize(LabeledDataset(X, y), "logistic")[0]
    rep = nn.zero_condition_logistic(std.X, std.y, nn.NeuralParams(np.zeros(6), 1.0, 0.0, 0.0))
    np.testing.assert_allclose(rep.stat, std.X.T @ (std.y - 0.5) / len(y), atol=1e-15)
    assert np.max(np.abs(rep.stat)) == pytest.approx(
        np.max(np.abs(std.X.T @ (std.y - 0.5))) / len(y))


@pytest.mark.parametrize("seed", range(5))
def test_zero_condition_agrees_with_cd(seed):
    X, y, _ = _problem(300 + seed, n=40, p=10)
    ds = standardize(LabeledDataset(X, y))[0]
    lam = 0.2 * lambda_max(ds, "linear")
    beta = cd_linear(ds, lam, tol=1e-12).beta
    rep = nn.zero_condition_linear(ds.X, ds.y, nn.NeuralParams(beta, 1.0, 0.0, lam))
    clear = np.abs(np.abs(rep.stat) - lam) > 1e-6
    assert np.array_equal(rep.zeroed[clear], (beta == 0)[clear])

    Xl, yl, _ = _problem(400 + seed, n=80, p=8, logistic=True)
    dl = standardize(LabeledDataset(Xl, yl), "logistic")[0]
    lam = 0.2 * lambda_max(dl, "logistic")
    m = cd_logistic(dl, lam, tol=1e-12)
    rep = nn.zero_condition_logistic(dl.X, dl.y, nn.NeuralParams(m.beta, 1.0, m.intercept, lam))
    clear = np.abs(np.abs(rep.stat) - lam) > 1e-6
    assert np.array_equal(rep.zeroed[clear], (m.beta == 0)[clear])


def test_apply_zeroing():
    par = nn.NeuralParams(np.array([1.0, -2.0, 3.0]), 1.0, 0.0, 0.1)
    none = nn.ZeroCheckReport(np.zeros(3), 0.1, np.zeros(3, bool))
    assert nn.apply_zeroing(par, none) is par
    allr = nn.ZeroCheckReport(np.zeros(3), 0.1, np.ones(3, bool))
    z = nn.apply_zeroing(par, allr)
    assert np.all(z.w == 0) and not np.any(np.signbit(z.w))
    some = nn.ZeroCheckReport(np.zeros(3), 0.1, np.array([False, True, False]))
    once = nn.apply_zeroing(par, some)
    assert once.w.tolist() == [1.0, 0.0, 3.0]
    assert np.array_equal(nn.apply_zeroing(once, some).w, once.w)


def test_adam_first_step_identity():
    par = nn.NeuralParams(np.array([0.0]), 1.0, 0.0, 0.0, gamma_frozen=True)
    st = nn.AdamState.for_params(par, False, lr=0.1)
    st, out = nn.adam_step(st, par, nn.Gradient(np.array([1.0]), 0.0))
    assert out.w[0] == pytest.approx(-0.1, rel=1e-7)
    assert st.step_count == 1


def test_adam_zero_gradient():
    par = nn.NeuralParams(np.array([0.3, -0.2]), 1.2, 0.0, 0.0)
    st = nn.AdamState.for_params(par, False)
    st, out = nn.adam_step(st, par, nn.Gradient(np.zeros(2), 0.0))
    assert np.array_equal(out.w, par.w) and out.gamma == par.gamma
    assert st.step_count == 1


def test_adam_constant_gradient_saturates():
    par = nn.NeuralParams(np.array([0.0]), 1.0, 0.0, 0.0, gamma_frozen=True)
    st = nn.AdamState.for_params(par, False, lr=0.01)
    prev = 0.0
    for t in range(1, 301):
        st, par = nn.adam_step(st, par, nn.Gradient(np.array([2.0]), 0.0))
        step = prev - par.w[0]
        # closed form: with constant g, mhat = g and vhat = g^2 exactly
        assert step == pytest.approx(0.01 * 2.0 / (2.0 + 1e-8), rel=1e-9)
        assert step > 0
        prev = par.w[0]
    assert all(np.asarray(st.v) >= 0)


def test_adam_dimension_mismatch_and_reset():
    par = nn.NeuralParams(np.zeros(3), 1.0, 0.0, 0.0)
    st = nn.AdamState.for_params(par, logistic=True)
    assert st.m.shape == (5,)
    with pytest.raises(DimensionMismatch):
        nn.adam_step(st, par, nn.Gradient(np.zeros(3), 0.0))
    st, par2 = nn.adam_step(st, par, nn.Gradient(np.ones(3), 0.5, 0.2))
    st2 = st.reset(np.array([True, False, False]))
    assert st2.m[0] == 0 and st2.v[0] == 0 and st2.m[1] == st.m[1] and st2.m[3] == st.m[3]


def test_effective_coefficients():
    par = nn.NeuralParams(np.array([1.0, -2.0]), 0.5, 0.0, 0.2)
    assert par.beta.tolist() == [0.5, -1.0]
    assert float(par.lam) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        nn.NeuralParams(np.zeros(2), 1.0, 0.0, -0.1)
