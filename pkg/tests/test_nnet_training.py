import numpy as np
import pytest

from stackplay.nnet import (
    Adam,
    Network,
    TrainConfig,
    TrainingDiverged,
    dense_stack,
    train,
    train_with_lr_grid,
)


def toy_separable(n=20, seed=0):
    rng = np.random.default_rng(seed)
    x0 = rng.normal(loc=-2.0, size=(n // 2, 3))
    x1 = rng.normal(loc=+2.0, size=(n // 2, 3))
    x = np.vstack([x0, x1])
    y = np.array([0] * (n // 2) + [1] * (n // 2))
    return x, y


def test_separable_toy_reaches_full_accuracy():
    x, y = toy_separable()
    net = dense_stack([3, 8], 2, rng=np.random.default_rng(1))
    train(net, x, y, TrainConfig(lr=1e-2, batch_size=4, epochs=200, seed=2))
    assert net.accuracy(x, y) == 1.0


def test_frozen_layers_bit_identical():
    x, y = toy_separable(40, seed=3)
    net = dense_stack([3, 10, 6], 2, rng=np.random.default_rng(4))
    net.layers[0].frozen = True
    before = {k: v.copy() for k, v in net.layers[0].params().items()}
    train(net, x, y, TrainConfig(lr=1e-2, batch_size=8, epochs=30, seed=5))
    after = net.layers[0].params()
    for k in before:
        assert np.array_equal(before[k], after[k])
    # unfrozen layers did move
    assert not np.array_equal(net.layers[1].W, before["W"][: net.layers[1].in_dim])


def test_all_frozen_leaves_network_unchanged():
    x, y = toy_separable(20, seed=6)
    net = dense_stack([3, 5], 2, rng=np.random.default_rng(7))
    for layer in net.layers:
        layer.frozen = True
    snapshot = [{k: v.copy() for k, v in l.params().items()} for l in net.layers]
    hist, _ = train(net, x, y, TrainConfig(lr=1e-2, batch_size=5, epochs=10, seed=8))
    for layer, snap in zip(net.layers, snapshot):
        for k, v in snap.items():
            assert np.array_equal(layer.params()[k], v)
    assert np.allclose(hist.train_loss, hist.train_loss[0])


def test_decoupled_weight_decay_closed_form():
    # zero gradients (frozen loss surface) leave only the decay shrink:
    # W_k = W_0 * (1 - lr*wd)^k, verified elementwise
    net = dense_stack([4, 6], 3, rng=np.random.default_rng(9))
    w0 = net.layers[0].W.copy()
    lr, wd, steps = 1e-2, 0.01, 7
    opt = Adam(lr, weight_decay=wd)
    for layer in net.layers:
        layer.gW = np.zeros_like(layer.W)
        layer.gb = np.zeros_like(layer.b)
    for _ in range(steps):
        opt.step(net)
    expect = w0 * (1.0 - lr * wd) ** steps
    assert np.allclose(net.layers[0].W, expect, rtol=0, atol=1e-15)
    assert np.all(np.linalg.norm(net.layers[0].W) < np.linalg.norm(w0))
    # biases are never decayed
    assert np.array_equal(net.layers[0].b, np.zeros(6))


def test_training_deterministic_per_seed():
    x, y = toy_separable(30, seed=10)
    outs = []
    for _ in range(2):
        net = dense_stack([3, 7], 2, rng=np.random.default_rng(11))
        train(net, x, y, TrainConfig(lr=1e-2, batch_size=4, epochs=20, seed=12))
        outs.append(net.layers[0].W.copy())
    assert np.array_equal(outs[0], outs[1])


def test_nan_loss_aborts():
    x, y = toy_separable(20, seed=13)
    net = dense_stack([3, 5], 2, rng=np.random.default_rng(14))
    for layer in net.layers:  # overflow factory: 1e160 * 1e160 -> inf -> NaN loss
        layer.W[:] = 1e160
    with np.errstate(over="ignore", invalid="ignore"), pytest.raises(TrainingDiverged):
        train(net, x, y, TrainConfig(lr=1.0, batch_size=5, epochs=3, seed=15))


def test_early_stop_restores_best_epoch():
    x, y = toy_separable(40, seed=16)
    xv, yv = toy_separable(20, seed=17)
    net = dense_stack([3, 8], 2, rng=np.random.default_rng(18))
    hist, _ = train(net, x, y,
                    TrainConfig(lr=5e-3, batch_size=8, epochs=60, patience=10, seed=19),
                    x_val=xv, y_val=yv)
    assert hist.best_epoch >= 0
    assert net.accuracy(xv, yv) == max(hist.val_accuracy)


def test_lr_grid_picks_a_grid_member():
    x, y = toy_separable(40, seed=20)
    xv, yv = toy_separable(20, seed=21)

    def make():
        return dense_stack([3, 6], 2, rng=np.random.default_rng(22))

    cfg = TrainConfig(lr_grid=[1e-3, 1e-4, 1e-5], batch_size=8, epochs=30, seed=23)
    net, hist = train_with_lr_grid(make, x, y, cfg, xv, yv)
    assert hist.lr in cfg.lr_grid
    assert net.accuracy(xv, yv) >= 0.5
