"""Minibatch training: Adam with decoupled weight decay, layer freezing,
seeded shuffling, validation-accuracy early stopping, and a small
learning-rate grid search.

Weight decay only touches weight matrices (never biases) and is applied
as a separate multiplicative shrink, not through the Adam moments.
Frozen layers receive no updates and no decay.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import Network


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    lr: float = 1e-4
    batch_size: int = 32
    epochs: int = 200
    weight_decay: float = 0.0
    lr_grid: list[float] = field(default_factory=list)
    early_stop_metric: str = "val_accuracy"
    patience: int | None = None
    seed: int = 0

    def validate(self) -> None:
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.early_stop_metric != "val_accuracy":
            raise ValueError(f"unsupported early-stop metric {self.early_stop_metric!r}")


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = -1
    lr: float = 0.0


class Adam:
    def __init__(self, lr: float, weight_decay: float = 0.0,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.moments: dict[str, dict[str, np.ndarray]] = {}

    def _moment(self, key: str, shape) -> dict[str, np.ndarray]:
        if key not in self.moments:
            self.moments[key] = {"m": np.zeros(shape), "v": np.zeros(shape)}
        return self.moments[key]

    def step(self, net: Network) -> None:
        self.t += 1
        for i, layer in enumerate(net.layers):
            if layer.frozen or not layer.params():
                continue
            grads = layer.grads()
            decayable = layer.decayable()
            for name, p in layer.params().items():
                g = grads[name]
                mo = self._moment(f"{i}.{name}", p.shape)
                m, v = mo["m"], mo["v"]
                m *= self.beta1
                m += (1 - self.beta1) * g
                v *= self.beta2
                v += (1 - self.beta2) * g * g
                mhat = m / (1 - self.beta1 ** self.t)
                vhat = v / (1 - self.beta2 ** self.t)
                np.sqrt(vhat, out=vhat)
                vhat += self.eps
                mhat *= self.lr
                mhat /= vhat
                p -= mhat
                if self.weight_decay and name in decayable:
                    p -= self.lr * self.weight_decay * p

    def state(self) -> dict:
        return {"t": self.t, "moments": self.moments}

    def load_state(self, state: dict) -> None:
        self.t = state["t"]
        self.moments = state["moments"]


def train(net: Network, x: np.ndarray, y: np.ndarray, cfg: TrainConfig,
          x_val: np.ndarray | None = None, y_val: np.ndarray | None = None,
          optimizer: Adam | None = None) -> tuple[History, Adam]:
    """Train in place; returns the history and the optimizer (for resume)."""
    cfg.validate()
    n = x.shape[0]
    opt = optimizer or Adam(cfg.lr, cfg.weight_decay)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5455]))
    hist = History(lr=cfg.lr)
    track_val = x_val is not None and len(x_val) > 0
    best_acc = -1.0
    best_state: dict | None = None
    stale = 0

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss = net.loss_and_backward(x[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, lr {cfg.lr:g}")
            opt.step(net)
            total += loss * len(idx)
        hist.train_loss.append(total / n)
        if track_val:
            acc = net.accuracy(x_val, y_val)
            hist.val_accuracy.append(acc)
            if acc > best_acc:
                best_acc = acc
                best_state = net.to_dict()
                hist.best_epoch = epoch
                stale = 0
            else:
                stale += 1
                if cfg.patience is not None and stale > cfg.patience:
                    break

    if track_val and best_state is not None:
        restored = Network.from_dict(best_state)
        for layer, saved in zip(net.layers, restored.layers):
            for name, value in saved.params().items():
                setattr(layer, name, value)
    return hist, opt


def train_with_lr_grid(make_net, x, y, cfg: TrainConfig,
                       x_val: np.ndarray, y_val: np.ndarray):
    """Train one copy per grid learning rate; keep the best validation
    accuracy (ties go to the earlier grid entry)."""
    grid = cfg.lr_grid or [cfg.lr]
    best = None
    for lr in grid:
        net = make_net()
        run_cfg = TrainConfig(lr=lr, batch_size=cfg.batch_size, epochs=cfg.epochs,
                              weight_decay=cfg.weight_decay, patience=cfg.patience,
                              seed=cfg.seed)
        hist, _ = train(net, x, y, run_cfg, x_val, y_val)
        acc = net.accuracy(x_val, y_val)
        if best is None or acc > best[0]:
            best = (acc, net, hist)
    return best[1], best[2]
