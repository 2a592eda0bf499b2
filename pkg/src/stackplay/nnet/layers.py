"""Dense and 1D-convolution layers over float64 numpy arrays.

Conventions: dense layers map (batch, in_dim) -> (batch, out_dim) with
weights of shape (in_dim, out_dim). Conv layers map (batch, channels,
length) -> (batch, filters, out_length) with no padding. A Flatten
pseudo-layer bridges conv output into the dense stack. All parameters
are float64; forward caches what backward needs.
"""

from __future__ import annotations

import numpy as np

LEAKY_ALPHA = 0.01


def activate(name: str, z: np.ndarray, alpha: float = LEAKY_ALPHA) -> np.ndarray:
    if name == "linear":
        return z
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "leaky_relu":
        return np.where(z > 0.0, z, alpha * z)
    if name == "tanh":
        return np.tanh(z)
    raise ValueError(f"unknown activation {name!r}")


def activate_grad(name: str, z: np.ndarray, alpha: float = LEAKY_ALPHA) -> np.ndarray:
    if name == "linear":
        return np.ones_like(z)
    if name == "relu":
        return (z > 0.0).astype(z.dtype)
    if name == "leaky_relu":
        return np.where(z > 0.0, 1.0, alpha)
    if name == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    raise ValueError(f"unknown activation {name!r}")


def kaiming_uniform(rng: np.random.Generator, shape: tuple[int, ...],
                    fan_in: int, scale: float = 1.0) -> np.ndarray:
    bound = scale * np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Dense:
    kind = "dense"

    def __init__(self, in_dim: int, out_dim: int, activation: str = "leaky_relu",
                 alpha: float = LEAKY_ALPHA, frozen: bool = False,
                 rng: np.random.Generator | None = None, init_scale: float = 1.0):
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self.activation = activation
        self.alpha = float(alpha)
        self.frozen = bool(frozen)
        if rng is None:
            self.W = np.zeros((in_dim, out_dim))
            self.b = np.zeros(out_dim)
        else:
            self.W = kaiming_uniform(rng, (in_dim, out_dim), in_dim, init_scale)
            self.b = np.zeros(out_dim)
        self._x = None
        self._z = None
        self.gW = None
        self.gb = None

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(f"dense expects (batch, {self.in_dim}), got {x.shape}")
        z = x @ self.W + self.b
        if train:
            self._x, self._z = x, z
        return activate(self.activation, z, self.alpha)

    def backward(self, grad_out: np.ndarray, need_input_grad: bool = True) -> np.ndarray | None:
        gz = grad_out * activate_grad(self.activation, self._z, self.alpha)
        self.gW = self._x.T @ gz
        self.gb = gz.sum(axis=0)
        return gz @ self.W.T if need_input_grad else None

    def params(self) -> dict[str, np.ndarray]:
        return {"W": self.W, "b": self.b}

    def grads(self) -> dict[str, np.ndarray]:
        return {"W": self.gW, "b": self.gb}

    def decayable(self) -> tuple[str, ...]:
        return ("W",)


class Conv1D:
    kind = "conv1d"

    def __init__(self, in_channels: int, filters: int, kernel: int, stride: int,
                 activation: str = "relu", alpha: float = LEAKY_ALPHA,
                 frozen: bool = False, rng: np.random.Generator | None = None,
                 init_scale: float = 1.0):
        self.in_channels = int(in_channels)
        self.filters = int(filters)
        self.kernel = int(kernel)
        self.stride = int(stride)
        self.activation = activation
        self.alpha = float(alpha)
        self.frozen = bool(frozen)
        fan_in = in_channels * kernel
        if rng is None:
            self.W = np.zeros((fan_in, filters))
        else:
            self.W = kaiming_uniform(rng, (fan_in, filters), fan_in, init_scale)
        self.b = np.zeros(filters)
        self._cols = None
        self._z = None
        self._in_shape = None
        self.gW = None
        self.gb = None

    def out_length(self, in_length: int) -> int:
        if in_length < self.kernel:
            raise ValueError(f"input length {in_length} shorter than kernel {self.kernel}")
        return (in_length - self.kernel) // self.stride + 1

    def _im2col(self, x: np.ndarray) -> np.ndarray:
        # x: (batch, C, L) -> (batch, Lo, C*kernel)
        lo = self.out_length(x.shape[2])
        idx = np.arange(lo)[:, None] * self.stride + np.arange(self.kernel)[None, :]
        cols = x[:, :, idx]                      # (batch, C, Lo, k)
        return cols.transpose(0, 2, 1, 3).reshape(x.shape[0], lo, -1)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if x.ndim != 3 or x.shape[1] != self.in_channels:
            raise ValueError(
                f"conv1d expects (batch, {self.in_channels}, length), got {x.shape}")
        cols = self._im2col(x)                   # (batch, Lo, C*k)
        lo = cols.shape[1]
        z = (cols.reshape(-1, cols.shape[-1]) @ self.W).reshape(
            x.shape[0], lo, self.filters) + self.b

        if train:
            self._cols, self._z, self._in_shape = cols, z, x.shape
        return activate(self.activation, z, self.alpha).transpose(0, 2, 1)

    def backward(self, grad_out: np.ndarray, need_input_grad: bool = True) -> np.ndarray | None:
        # grad_out: (batch, F, Lo) -> align with z's (batch, Lo, F)
        g = grad_out.transpose(0, 2, 1)
        gz = g * activate_grad(self.activation, self._z, self.alpha)
        ck = self._cols.shape[-1]
        self.gW = self._cols.reshape(-1, ck).T @ gz.reshape(-1, self.filters)
        self.gb = gz.sum(axis=(0, 1))
        if not need_input_grad:
            return None
        batch, _, length = self._in_shape
        lo = gz.shape[1]
        gcols = (gz.reshape(-1, self.filters) @ self.W.T).reshape(
            batch, lo, self.in_channels, self.kernel)
        gx = np.zeros(self._in_shape)
        # scatter-add overlapping windows back onto the input; for a fixed
        # kernel offset the window positions are distinct, so each offset is
        # one collision-free strided add
        stop = self.stride * (lo - 1) + 1
        for ki in range(self.kernel):
            gx[:, :, ki:ki + stop:self.stride] += gcols[:, :, :, ki].transpose(0, 2, 1)
        return gx

    def params(self) -> dict[str, np.ndarray]:
        return {"W": self.W, "b": self.b}

    def grads(self) -> dict[str, np.ndarray]:
        return {"W": self.gW, "b": self.gb}

    def decayable(self) -> tuple[str, ...]:
        return ("W",)


class Flatten:
    kind = "flatten"
    frozen = True
    activation = "linear"

    def __init__(self):
        self._in_shape = None

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if train:
            self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out: np.ndarray, need_input_grad: bool = True) -> np.ndarray | None:
        if not need_input_grad:
            return None
        return grad_out.reshape(self._in_shape)

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def grads(self) -> dict[str, np.ndarray]:
        return {}

    def decayable(self) -> tuple[str, ...]:
        return ()
