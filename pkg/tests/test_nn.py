"""Numerical core tests.

The gradient oracles here are independent float64 shadow implementations
of each op; analytic gradients from the float32 implementation must match
central finite differences of the shadow at 1e-4 relative. Adam is checked
against a hand-rolled two-step replay.
"""

import numpy as np
import pytest

from rep3net.exceptions import DataError, NumericError
from rep3net.nn import (
    Adam,
    BatchNorm,
    Dropout,
    Linear,
    ParamState,
    ReLU,
    cosine_lr,
    dropout,
    linear,
    linear_backward,
    mse_loss,
    relu,
    relu_backward,
    uniform_init,
)

# ---------------------------------------------------------------------------
# float64 shadow ops (oracles)


def shadow_linear(x, W, b):
    return x @ W + b


def shadow_batchnorm_train(x, gamma, beta, eps=1e-5):
    mean = x.mean(axis=0, keepdims=True)
    var = x.var(axis=0, keepdims=True)
    return gamma * (x - mean) / np.sqrt(var + eps) + beta


def shadow_batchnorm_eval(x, gamma, beta, mean, var, eps=1e-5):
    return gamma * (x - mean) / np.sqrt(var + eps) + beta


def fd_grad(f, arrays, idx, eps=1e-3):
    """Central finite-difference gradient of scalar f wrt arrays[idx]."""
    arrays = [np.array(a, dtype=np.float64) for a in arrays]
    target = arrays[idx]
    grad = np.zeros_like(target)
    it = np.nditer(target, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        orig = target[i]
        target[i] = orig + eps
        hi = f(*arrays)
        target[i] = orig - eps
        lo = f(*arrays)
        target[i] = orig
        grad[i] = (hi - lo) / (2 * eps)
    return grad


def rel_err(a, b):
    # floor the scale so an exactly-zero oracle gradient (e.g. a bias
    # feeding straight into batchnorm) compares absolutely
    scale = max(np.max(np.abs(b)), 1e-3)
    return np.max(np.abs(np.asarray(a, dtype=np.float64) - b)) / scale


# ---------------------------------------------------------------------------
# linear


def test_linear_identity():
    x = np.array([[1.0, -2.0], [0.5, 3.0]], dtype=np.float32)
    y = linear(x, np.eye(2, dtype=np.float32), np.zeros((1, 2), dtype=np.float32))
    assert np.array_equal(y, x)


def test_linear_scalar_case():
    y = linear(np.array([[2.0]]), np.array([[3.0]]), np.array([[1.0]]))
    assert y[0, 0] == 7.0
    dx, dW, db = linear_backward(
        np.array([[2.0]]), np.array([[3.0]]), np.array([[1.0]])
    )
    assert dx[0, 0] == 3.0
    assert dW[0, 0] == 2.0
    assert db[0, 0] == 1.0


def test_linear_shape_errors():
    with pytest.raises(DataError):
        linear(np.zeros((2, 3)), np.zeros((4, 2)), np.zeros((1, 2)))
    with pytest.raises(DataError):
        linear(np.zeros((2, 3)), np.zeros((3, 2)), np.zeros((1, 3)))
    with pytest.raises(NumericError):
        linear(np.array([[np.inf]]), np.ones((1, 1)), np.zeros((1, 1)))


def test_linear_gradients_vs_shadow():
    rng = np.random.default_rng(20)
    for rows, n_in, n_out in [(1, 1, 1), (4, 3, 5), (7, 6, 2)]:
        x = rng.normal(size=(rows, n_in)).astype(np.float32)
        W = rng.normal(size=(n_in, n_out)).astype(np.float32)
        b = rng.normal(size=(1, n_out)).astype(np.float32)
        s = rng.normal(size=(rows, n_out))  # random linear functional

        def loss(x64, W64, b64):
            return float(np.sum(shadow_linear(x64, W64, b64) * s))

        dx, dW, db = linear_backward(x, W, s.astype(np.float32))
        assert rel_err(dx, fd_grad(loss, [x, W, b], 0)) < 1e-4
        assert rel_err(dW, fd_grad(loss, [x, W, b], 1)) < 1e-4
        assert rel_err(db, fd_grad(loss, [x, W, b], 2)) < 1e-4


# ---------------------------------------------------------------------------
# batchnorm


def test_batchnorm_identity_on_standardized_batch():
    bn = BatchNorm(2)
    x = np.array([[-1.0, 1.0], [1.0, -1.0]], dtype=np.float32)  # mean 0, var 1
    y = bn.forward(x, training=True)
    assert np.allclose(y, x, atol=1e-4)


def test_batchnorm_eval_formula():
    bn = BatchNorm(2)
    bn.gamma.value[:] = np.array([[2.0, 0.5]], dtype=np.float32)
    bn.beta.value[:] = np.array([[1.0, -1.0]], dtype=np.float32)
    bn.running_mean[:] = np.array([[3.0, -2.0]], dtype=np.float32)
    bn.running_var[:] = np.array([[4.0, 0.25]], dtype=np.float32)
    x = np.array([[5.0, 0.0], [3.0, -2.0]], dtype=np.float32)
    expected = shadow_batchnorm_eval(
        x.astype(np.float64),
        np.array([2.0, 0.5]),
        np.array([1.0, -1.0]),
        np.array([3.0, -2.0]),
        np.array([4.0, 0.25]),
    )
    y = bn.forward(x, training=False)
    assert np.allclose(y, expected, atol=1e-5)


def test_batchnorm_batch_of_one_rejected():
    bn = BatchNorm(3)
    with pytest.raises(DataError):
        bn.forward(np.ones((1, 3), dtype=np.float32), training=True)
    # eval mode is fine with a single row
    y = bn.forward(np.ones((1, 3), dtype=np.float32), training=False)
    assert y.shape == (1, 3)


def test_batchnorm_running_stats_update():
    bn = BatchNorm(1)
    x = np.array([[1.0], [2.0], [3.0], [4.0]], dtype=np.float32)
    bn.forward(x, training=True)
    # torch convention: momentum 0.1, unbiased variance into the running stat
    mean, unbiased = 2.5, np.var([1.0, 2.0, 3.0, 4.0]) * 4 / 3
    assert bn.running_mean[0, 0] == pytest.approx(0.9 * 0.0 + 0.1 * mean, rel=1e-6)
    assert bn.running_var[0, 0] == pytest.approx(0.9 * 1.0 + 0.1 * unbiased, rel=1e-6)


def test_batchnorm_gradients_vs_shadow():
    rng = np.random.default_rng(21)
    x = rng.normal(size=(5, 3)).astype(np.float32)
    gamma = rng.normal(size=(1, 3)).astype(np.float32)
    beta = rng.normal(size=(1, 3)).astype(np.float32)
    s = rng.normal(size=(5, 3))

    bn = BatchNorm(3)
    bn.gamma.value[:] = gamma
    bn.beta.value[:] = beta
    bn.forward(x, training=True)
    dx = bn.backward(s.astype(np.float32))

    def loss(x64, g64, b64):
        return float(np.sum(shadow_batchnorm_train(x64, g64, b64) * s))

    assert rel_err(dx, fd_grad(loss, [x, gamma, beta], 0)) < 1e-4
    assert rel_err(bn.gamma.grad, fd_grad(loss, [x, gamma, beta], 1)) < 1e-4
    assert rel_err(bn.beta.grad, fd_grad(loss, [x, gamma, beta], 2)) < 1e-4


def test_batchnorm_eval_backward():
    rng = np.random.default_rng(22)
    bn = BatchNorm(2)
    bn.running_mean[:] = rng.normal(size=(1, 2)).astype(np.float32)
    bn.running_var[:] = np.abs(rng.normal(size=(1, 2))).astype(np.float32) + 0.5
    x = rng.normal(size=(3, 2)).astype(np.float32)
    s = rng.normal(size=(3, 2))
    bn.forward(x, training=False)
    dx = bn.backward(s.astype(np.float32))
    mean = bn.running_mean.astype(np.float64)
    var = bn.running_var.astype(np.float64)

    def loss(x64):
        return float(np.sum(shadow_batchnorm_eval(x64, 1.0, 0.0, mean, var) * s))

    assert rel_err(dx, fd_grad(loss, [x], 0)) < 1e-4


# ---------------------------------------------------------------------------
# relu / dropout


def test_relu_values():
    x = np.array([[-3.0, 0.0, 3.0]], dtype=np.float32)
    assert relu(x).tolist() == [[0.0, 0.0, 3.0]]
    dy = np.ones_like(x)
    assert relu_backward(x, dy).tolist() == [[0.0, 0.0, 1.0]]


def test_dropout_p_zero_identity():
    x = np.arange(6, dtype=np.float32).reshape(2, 3)
    y, mask = dropout(x, 0.0, np.random.default_rng(0), training=True)
    assert np.array_equal(y, x)
    assert np.array_equal(mask, np.ones_like(x))


def test_dropout_eval_identity():
    x = np.arange(6, dtype=np.float32).reshape(2, 3)
    y, _ = dropout(x, 0.7, np.random.default_rng(0), training=False)
    assert np.array_equal(y, x)


def test_dropout_p_range():
    x = np.ones((1, 1), dtype=np.float32)
    for p in (-0.1, 1.0, 1.5):
        with pytest.raises(DataError):
            dropout(x, p, np.random.default_rng(0), training=True)


def test_dropout_expectation():
    # E[dropout(x)] = x: survivors are scaled by 1/(1-p)
    p = 0.3
    n = 100_000
    rng = np.random.default_rng(33)
    x = np.ones((1, n), dtype=np.float32)
    y, _ = dropout(x, p, rng, training=True)
    assert abs(float(y.mean()) - 1.0) < 0.01


def test_dropout_deterministic_under_seed():
    x = np.ones((4, 8), dtype=np.float32)
    y1, _ = dropout(x, 0.5, np.random.default_rng(5), training=True)
    y2, _ = dropout(x, 0.5, np.random.default_rng(5), training=True)
    assert np.array_equal(y1, y2)


def test_dropout_backward_routes_through_mask():
    x = np.ones((2, 10), dtype=np.float32)
    layer = Dropout(0.5)
    y = layer.forward(x, training=True, rng=np.random.default_rng(9))
    dy = np.ones_like(x)
    dx = layer.backward(dy)
    assert np.array_equal(dx, layer._mask)
    assert set(np.unique(y)).issubset({0.0, 2.0})


# ---------------------------------------------------------------------------
# mse


def test_mse_zero_when_equal():
    loss, grad = mse_loss(np.array([[1.0], [2.0]]), np.array([[1.0], [2.0]]))
    assert loss == 0.0
    assert np.array_equal(grad, np.zeros((2, 1), dtype=np.float32))


def test_mse_hand_value():
    loss, grad = mse_loss(np.array([2.0, 2.0, 2.0]), np.array([1.0, 2.0, 3.0]))
    assert loss == pytest.approx(2 / 3, abs=1e-12)
    assert grad == pytest.approx(np.array([2 / 3, 0.0, -2 / 3]), abs=1e-7)


def test_mse_empty():
    with pytest.raises(DataError):
        mse_loss(np.zeros((0,)), np.zeros((0,)))
    with pytest.raises(DataError):
        mse_loss(np.zeros(3), np.zeros(4))


def test_mse_gradient_vs_fd():
    rng = np.random.default_rng(40)
    pred = rng.normal(size=6)
    target = rng.normal(size=6)
    _, grad = mse_loss(pred, target)

    def loss(p64):
        return float(np.mean((p64 - target) ** 2))

    fd = fd_grad(loss, [pred], 0, eps=1e-5)
    assert np.max(np.abs(grad - fd)) < 1e-6


# ---------------------------------------------------------------------------
# adam


def hand_adam(value, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8, wd=0.0):
    """Replay of coupled-decay Adam with float32 storage between steps."""
    value = np.float32(value)
    m = np.float32(0.0)
    v = np.float32(0.0)
    for t, g in enumerate(grads, start=1):
        g = np.float64(g) + wd * np.float64(value)
        m64 = beta1 * np.float64(m) + (1 - beta1) * g
        v64 = beta2 * np.float64(v) + (1 - beta2) * g * g
        m_hat = m64 / (1 - beta1**t)
        v_hat = v64 / (1 - beta2**t)
        value = np.float32(np.float64(value) - lr * m_hat / (np.sqrt(v_hat) + eps))
        m, v = np.float32(m64), np.float32(v64)
    return value


def test_adam_zero_grad_no_motion():
    p = ParamState(np.array([[1.5, -2.0]], dtype=np.float32))
    before = p.value.copy()
    Adam().step([p], lr=0.1)
    assert np.array_equal(p.value, before)


def test_adam_first_step_is_minus_lr():
    p = ParamState(np.array([[0.0]], dtype=np.float32))
    p.accumulate(np.array([[1.0]]))
    Adam().step([p], lr=1e-2)
    assert p.value[0, 0] == pytest.approx(-1e-2, rel=1e-6)


def test_adam_two_steps_match_hand_replay():
    p = ParamState(np.array([[0.7]], dtype=np.float32))
    opt = Adam(weight_decay=0.0)
    grads = [0.3, -0.8]
    for g in grads:
        p.zero_grad()
        p.accumulate(np.array([[g]]))
        opt.step([p], lr=2e-3)
    expected = hand_adam(0.7, grads, lr=2e-3)
    assert abs(float(p.value[0, 0]) - float(expected)) < 1e-12


def test_adam_coupled_decay_matches_hand_replay():
    p = ParamState(np.array([[1.2]], dtype=np.float32))
    opt = Adam(weight_decay=0.1)
    p.accumulate(np.array([[0.5]]))
    opt.step([p], lr=1e-2)
    # decay enters the gradient: g_eff = 0.5 + 0.1 * 1.2
    expected = hand_adam(1.2, [0.5], lr=1e-2, wd=0.1)
    assert abs(float(p.value[0, 0]) - float(expected)) < 1e-12


def test_adam_decoupled_decay():
    p = ParamState(np.array([[1.0]], dtype=np.float32))
    opt = Adam(weight_decay=0.1, decoupled=True)
    p.accumulate(np.array([[1.0]]))
    opt.step([p], lr=1e-2)
    # moments see the raw gradient; decay applied directly to the value
    expected = 1.0 - 1e-2 * 1.0 / (1.0 + 1e-8) - 1e-2 * 0.1 * 1.0
    assert p.value[0, 0] == pytest.approx(expected, rel=1e-6)


# ---------------------------------------------------------------------------
# cosine schedule


def test_cosine_lr_endpoints():
    assert cosine_lr(0, 5e-5, 20) == pytest.approx(5e-5, rel=1e-12)
    assert cosine_lr(20, 5e-5, 20) == pytest.approx(0.0, abs=1e-20)
    assert cosine_lr(20, 5e-5, 20, lr_min=1e-6) == pytest.approx(1e-6, rel=1e-12)


def test_cosine_lr_midpoint():
    assert cosine_lr(10, 5e-5, 20) == pytest.approx(2.5e-5, rel=1e-12)


def test_cosine_lr_range_check():
    with pytest.raises(DataError):
        cosine_lr(-1, 1e-4, 20)
    with pytest.raises(DataError):
        cosine_lr(21, 1e-4, 20)


def test_cosine_lr_monotone_decreasing():
    lrs = [cosine_lr(e, 5e-5, 20) for e in range(21)]
    assert all(a > b for a, b in zip(lrs, lrs[1:]))


# ---------------------------------------------------------------------------
# layers and composition


def test_linear_layer_seeded_init_deterministic():
    a = Linear(4, 3, np.random.default_rng(77))
    b = Linear(4, 3, np.random.default_rng(77))
    assert np.array_equal(a.W.value, b.W.value)
    assert np.array_equal(a.b.value, b.b.value)
    bound = 1.0 / np.sqrt(4)
    assert np.all(np.abs(a.W.value) <= bound)


def test_gradient_accumulation():
    layer = Linear(2, 1, np.random.default_rng(1))
    x = np.ones((3, 2), dtype=np.float32)
    dy = np.ones((3, 1), dtype=np.float32)
    layer.forward(x)
    layer.backward(dy)
    once = layer.W.grad.copy()
    layer.forward(x)
    layer.backward(dy)
    assert np.allclose(layer.W.grad, 2 * once)
    layer.W.zero_grad()
    assert np.all(layer.W.grad == 0)


def test_full_block_gradient_vs_shadow():
    # FC -> BN -> ReLU -> FC -> MSE, the regressor's repeating unit
    rng = np.random.default_rng(50)
    fc1 = Linear(4, 6, rng)
    bn = BatchNorm(6)
    act = ReLU()
    fc2 = Linear(6, 1, rng)
    x = rng.normal(size=(5, 4)).astype(np.float32)
    target = rng.normal(size=(5, 1)).astype(np.float32)

    h = fc2.forward(act.forward(bn.forward(fc1.forward(x), training=True)))
    loss, dl = mse_loss(h, target)
    fc1.backward(bn.backward(act.backward(fc2.backward(dl))))

    def shadow_loss(W1, b1, g, be, W2, b2):
        z = shadow_batchnorm_train(x.astype(np.float64) @ W1 + b1, g, be)
        z = np.maximum(z, 0.0)
        out = z @ W2 + b2
        return float(np.mean((out - target.astype(np.float64)) ** 2))

    arrays = [fc1.W.value, fc1.b.value, bn.gamma.value, bn.beta.value,
              fc2.W.value, fc2.b.value]
    grads = [fc1.W.grad, fc1.b.grad, bn.gamma.grad, bn.beta.grad,
             fc2.W.grad, fc2.b.grad]
    for idx, analytic in enumerate(grads):
        fd = fd_grad(shadow_loss, arrays, idx)
        assert rel_err(analytic, fd) < 1e-4, idx


def test_two_seeded_runs_bit_identical():
    def run():
        rng = np.random.default_rng(99)
        fc = Linear(3, 2, rng)
        bn = BatchNorm(2)
        drop = Dropout(0.25)
        opt = Adam(weight_decay=1e-5)
        x = np.linspace(-1, 1, 12, dtype=np.float32).reshape(4, 3)
        t = np.ones((4, 1), dtype=np.float32)
        proj = Linear(2, 1, rng)
        for _ in range(3):
            h = drop.forward(bn.forward(fc.forward(x), True), True, rng)
            loss, dl = mse_loss(proj.forward(h), t)
            for p in fc.params() + bn.params() + proj.params():
                p.zero_grad()
            fc.backward(bn.backward(drop.backward(proj.backward(dl))))
            opt.step(fc.params() + bn.params() + proj.params(), lr=1e-3)
        return fc.W.value.copy(), bn.gamma.value.copy(), proj.W.value.copy()

    a, b = run(), run()
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_param_state_validation():
    with pytest.raises(DataError):
        ParamState(np.zeros(3))
    p = ParamState(np.zeros((2, 2)))
    with pytest.raises(DataError):
        p.accumulate(np.zeros((3, 2)))
    with pytest.raises(NumericError):
        p.accumulate(np.full((2, 2), np.nan))


def test_uniform_init_bound():
    W = uniform_init(np.random.default_rng(3), 100, 50)
    assert W.shape == (100, 50)
    assert np.all(np.abs(W) <= 0.1)
    assert W.dtype == np.float32
