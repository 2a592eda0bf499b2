"""Convolutional episode classifier and its embedding view.

A small 1-D CNN reads a whole padded episode as one single-channel
sequence (10 rows of c features, flattened to length 10c) and predicts
which known theme class produced it. The first convolution's kernel
spans one timestep row (width c) but slides with stride 8, so its
windows straddle row boundaries; per-dimension input conditioning
therefore happens on the input tensor itself, using frozen reference
constants carried inside the checkpoint. The second fully-connected
layer's post-activation output doubles as a 64-d episode embedding.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..nnet.layers import Conv1D, Dense, Flatten
from ..nnet.network import Network
from ..nnet.training import Adam, TrainConfig, train
from ..simworld import layout_dim, layout_stats
from .episodes import PAD_ROWS, ClassSplit, PaddedEpisode, stack_inputs

CONV1_FILTERS = 256
CONV1_STRIDE = 8
CONV2_FILTERS = 128
CONV2_KERNEL = 4
CONV2_STRIDE = 2
EMBED_DIM = 64

CNN_EPOCHS = 500
CNN_LR = 1e-3
CNN_BATCH_EPISODES = 10


def build_cnn(layout: str, class_names: list[str],
              rng: np.random.Generator) -> Network:
    c = layout_dim(layout)
    length = PAD_ROWS * c
    conv1 = Conv1D(1, CONV1_FILTERS, kernel=c, stride=CONV1_STRIDE, rng=rng)
    l1 = conv1.out_length(length)
    conv2 = Conv1D(CONV1_FILTERS, CONV2_FILTERS, kernel=CONV2_KERNEL,
                   stride=CONV2_STRIDE, rng=rng)
    l2 = conv2.out_length(l1)
    layers = [
        conv1,
        conv2,
        Flatten(),
        Dense(CONV2_FILTERS * l2, EMBED_DIM, "relu", rng=rng),
        Dense(EMBED_DIM, EMBED_DIM, "relu", rng=rng),
        Dense(EMBED_DIM, len(class_names), "linear", rng=rng),
    ]
    return Network(layers, class_names=list(class_names))


@dataclass
class CnnResult:
    net: Network
    layout: str
    loc: np.ndarray
    scale: np.ndarray
    dev_accuracy: float
    per_class_dev_accuracy: dict[str, float]
    confusion: np.ndarray  # rows true class, columns predicted, dev set


def condition_inputs(x: np.ndarray, layout: str, loc: np.ndarray | None = None,
                     scale: np.ndarray | None = None) -> np.ndarray:
    """Standardize each feature dimension of (n, 1, 10c) input tensors."""
    if loc is None or scale is None:
        loc, scale = layout_stats(layout)
    c = loc.shape[0]
    flat = x.reshape(x.shape[0], PAD_ROWS, c)
    return ((flat - loc) / scale).reshape(x.shape)


def _labels(padded: list[PaddedEpisode], class_names: list[str]) -> np.ndarray:
    index = {name: i for i, name in enumerate(class_names)}
    return np.array([index[p.label] for p in padded])


def train_cnn(splits: dict[str, ClassSplit], layout: str, seed: int = 0,
              epochs: int = CNN_EPOCHS, lr: float = CNN_LR,
              batch_episodes: int = CNN_BATCH_EPISODES) -> CnnResult:
    """Fit the classifier on each class's training episodes.

    Runs the full epoch budget (no early stopping); development episodes
    are only used to report accuracy and the confusion matrix.
    """
    class_names = list(splits)
    if len(class_names) < 2:
        raise ValueError(f"need at least 2 known classes, got {len(class_names)}")
    loc, scale = layout_stats(layout)

    train_eps = [p for name in class_names for p in splits[name].train]
    dev_eps = [p for name in class_names for p in splits[name].dev]
    x = condition_inputs(stack_inputs(train_eps), layout, loc, scale)
    y = _labels(train_eps, class_names)
    x_dev = condition_inputs(stack_inputs(dev_eps), layout, loc, scale)
    y_dev = _labels(dev_eps, class_names)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC41]))
    net = build_cnn(layout, class_names, rng)
    cfg = TrainConfig(lr=lr, batch_size=batch_episodes, epochs=epochs, seed=seed)
    train(net, x, y, cfg)

    pred = net.predict(x_dev)
    k = len(class_names)
    confusion = np.zeros((k, k), dtype=int)
    for t, p in zip(y_dev, pred):
        confusion[t, p] += 1
    per_class = {name: float(confusion[i, i] / max(1, confusion[i].sum()))
                 for i, name in enumerate(class_names)}
    return CnnResult(net=net, layout=layout, loc=loc, scale=scale,
                     dev_accuracy=float((pred == y_dev).mean()),
                     per_class_dev_accuracy=per_class, confusion=confusion)


def embed(net: Network, x: np.ndarray) -> np.ndarray:
    """64-d episode embeddings: the second dense layer's activations."""
    vecs = net.hidden_activations(x, layer_idx=-2)
    if vecs.shape[1] != EMBED_DIM:
        raise ValueError(f"expected {EMBED_DIM}-d embeddings, got {vecs.shape[1]}")
    return vecs


def embed_episodes(result: CnnResult, padded: list[PaddedEpisode]) -> np.ndarray:
    x = condition_inputs(stack_inputs(padded), result.layout, result.loc, result.scale)
    return embed(result.net, x)


def predict_episodes(result: CnnResult, padded: list[PaddedEpisode]) -> list[str]:
    x = condition_inputs(stack_inputs(padded), result.layout, result.loc, result.scale)
    idx = result.net.predict(x)
    return [result.net.class_names[i] for i in idx]


def save_cnn(path: Path | str, result: CnnResult) -> Path:
    meta = {
        "kind": "episode-cnn",
        "layout": result.layout,
        "loc": result.loc.tolist(),
        "scale": result.scale.tolist(),
        "dev_accuracy": result.dev_accuracy,
        "per_class_dev_accuracy": result.per_class_dev_accuracy,
        "confusion": result.confusion.tolist(),
    }
    return result.net.save(path, metadata=meta)


def load_cnn(path: Path | str) -> CnnResult:
    net, _, meta = Network.load_with_extras(path)
    if meta.get("kind") != "episode-cnn":
        raise ValueError("not an episode classifier checkpoint")
    return CnnResult(net=net, layout=meta["layout"],
                     loc=np.asarray(meta["loc"]), scale=np.asarray(meta["scale"]),
                     dev_accuracy=float(meta["dev_accuracy"]),
                     per_class_dev_accuracy=dict(meta["per_class_dev_accuracy"]),
                     confusion=np.asarray(meta["confusion"], dtype=int))
