"""Central finite-difference audit of the backward pass.

Perturbs every parameter element by +/-h, recomputes the loss, and
compares the numeric slope against the analytic gradient. Returns the
worst relative error over all parameters.
"""

from __future__ import annotations

import numpy as np

from .network import Network, cross_entropy


def grad_check(net: Network, x: np.ndarray, y: np.ndarray, h: float = 1e-5) -> float:
    loss = net.loss_and_backward(x, y)
    assert np.isfinite(loss)
    analytic = [{k: v.copy() for k, v in layer.grads().items()}
                for layer in net.layers]

    def loss_at() -> float:
        logits, _ = net.forward(x)
        return cross_entropy(logits, y)[0]

    worst = 0.0
    for layer, grads in zip(net.layers, analytic):
        for name, g in grads.items():
            p = layer.params()[name]
            flat_p = p.reshape(-1)
            flat_g = g.reshape(-1)
            for j in range(flat_p.size):
                orig = flat_p[j]
                flat_p[j] = orig + h
                up = loss_at()
                flat_p[j] = orig - h
                down = loss_at()
                flat_p[j] = orig
                numeric = (up - down) / (2.0 * h)
                denom = max(abs(flat_g[j]), abs(numeric), 1e-12)
                worst = max(worst, abs(flat_g[j] - numeric) / denom)
    return worst
