"""Network container: a layer stack ending in a linear softmax head.

The head layer produces logits; softmax lives in the loss and in
probs(). forward() also returns every layer's activation so callers can
pull hidden-layer embeddings. Checkpoints are versioned JSON with
base64-packed float64 arrays, bit-exact on round trip.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .layers import Conv1D, Dense, Flatten

CHECKPOINT_FORMAT = "stackplay-net"
CHECKPOINT_VERSION = 1


def _pack(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<f8")
    return {"shape": list(a.shape),
            "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _unpack(d: dict) -> np.ndarray:
    a = np.frombuffer(base64.b64decode(d["data"]), dtype="<f8")
    return a.reshape(d["shape"]).copy()


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    n = logits.shape[0]
    p = softmax(logits)
    eps = 1e-300  # guards log(0); irrelevant for well-scaled logits
    loss = -np.log(p[np.arange(n), labels] + eps).mean()
    grad = p
    grad[np.arange(n), labels] -= 1.0
    return float(loss), grad / n


class Network:
    def __init__(self, layers: list, class_names: list[str] | None = None):
        self.layers = list(layers)
        self.class_names = list(class_names) if class_names is not None else None

    # --- inference -------------------------------------------------------

    def forward(self, x: np.ndarray, train: bool = False):
        """Returns (logits, [activation of every layer])."""
        acts = []
        h = x
        for layer in self.layers:
            h = layer.forward(h, train=train)
            acts.append(h)
        return h, acts

    def logits(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def probs(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.logits(x))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.logits(x).argmax(axis=1)

    def accuracy(self, x: np.ndarray, y: np.ndarray) -> float:
        return float((self.predict(x) == y).mean())

    def hidden_activations(self, x: np.ndarray, layer_idx: int = -2) -> np.ndarray:
        """Activation of a hidden layer (default: last before the head)."""
        _, acts = self.forward(x)
        return acts[layer_idx]

    # --- training support ------------------------------------------------

    def loss_and_backward(self, x: np.ndarray, y: np.ndarray) -> float:
        logits, _ = self.forward(x, train=True)
        loss, grad = cross_entropy(logits, y)
        for i in range(len(self.layers) - 1, -1, -1):
            grad = self.layers[i].backward(grad, need_input_grad=i > 0)
        return loss

    def trainable_layers(self):
        return [l for l in self.layers if l.params() and not l.frozen]

    def copy(self) -> "Network":
        return Network.from_dict(self.to_dict())

    # --- head surgery ----------------------------------------------------

    @property
    def head(self) -> Dense:
        last = self.layers[-1]
        if not isinstance(last, Dense) or last.activation != "linear":
            raise ValueError("network has no linear softmax head")
        return last

    def mutate_head(self, mode: str, rng: np.random.Generator,
                    new_class_name: str | None = None, layer_width: int | None = None,
                    init_scale: float = 0.1) -> "Network":
        """Grow the network in place: new units start at 0.1x init scale."""
        if mode not in ("add_class", "add_layer", "add_layer_and_class"):
            raise ValueError(f"unknown mutation {mode!r}")
        head = self.head
        if mode in ("add_layer", "add_layer_and_class"):
            width = layer_width if layer_width is not None else head.in_dim
            if width != head.in_dim:
                raise ValueError(
                    f"inserted layer width {width} must match head input {head.in_dim}")
            grown = Dense(head.in_dim, width, activation="leaky_relu",
                          rng=rng, init_scale=init_scale)
            # identity backbone + small noise keeps the existing logits
            # calibrated at insertion time; fine-tuning moves it from there
            grown.W += np.eye(width)
            self.layers.insert(len(self.layers) - 1, grown)
        if mode in ("add_class", "add_layer_and_class"):
            from .layers import kaiming_uniform

            new_col = kaiming_uniform(rng, (head.in_dim, 1), head.in_dim, init_scale)
            head.W = np.concatenate([head.W, new_col], axis=1)
            head.b = np.concatenate([head.b, [0.0]])
            head.out_dim += 1
            if self.class_names is not None:
                self.class_names.append(new_class_name or f"class_{head.out_dim - 1}")
        return self

    # --- persistence -----------------------------------------------------

    def to_dict(self, optimizer_state: dict | None = None,
                metadata: dict | None = None) -> dict:
        layers = []
        for layer in self.layers:
            d = {"kind": layer.kind}
            if layer.kind == "dense":
                d.update(in_dim=layer.in_dim, out_dim=layer.out_dim,
                         activation=layer.activation, alpha=layer.alpha,
                         frozen=layer.frozen)
            elif layer.kind == "conv1d":
                d.update(in_channels=layer.in_channels, filters=layer.filters,
                         kernel=layer.kernel, stride=layer.stride,
                         activation=layer.activation, alpha=layer.alpha,
                         frozen=layer.frozen)
            d["params"] = {k: _pack(v) for k, v in layer.params().items()}
            layers.append(d)
        out = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "class_names": self.class_names,
            "layers": layers,
            "metadata": metadata or {},
        }
        if optimizer_state is not None:
            out["optimizer"] = {
                "t": optimizer_state["t"],
                "moments": {k: {"m": _pack(v["m"]), "v": _pack(v["v"])}
                            for k, v in optimizer_state["moments"].items()},
            }
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        if d.get("format") != CHECKPOINT_FORMAT:
            raise ValueError("not a network checkpoint")
        if d.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {d.get('version')}")
        layers = []
        for ld in d["layers"]:
            if ld["kind"] == "dense":
                layer = Dense(ld["in_dim"], ld["out_dim"], ld["activation"],
                              ld["alpha"], ld["frozen"])
            elif ld["kind"] == "conv1d":
                layer = Conv1D(ld["in_channels"], ld["filters"], ld["kernel"],
                               ld["stride"], ld["activation"], ld["alpha"],
                               ld["frozen"])
            elif ld["kind"] == "flatten":
                layer = Flatten()
            else:
                raise ValueError(f"unknown layer kind {ld['kind']!r}")
            for name, packed in ld["params"].items():
                setattr(layer, name, _unpack(packed))
            layers.append(layer)
        return cls(layers, d.get("class_names"))

    def save(self, path: Path | str, optimizer_state: dict | None = None,
             metadata: dict | None = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            json.dump(self.to_dict(optimizer_state, metadata), f,
                      indent=1, sort_keys=True)
            f.write("\n")
        return path

    @classmethod
    def load(cls, path: Path | str) -> "Network":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    @staticmethod
    def load_with_extras(path: Path | str) -> tuple["Network", dict | None, dict]:
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
        net = Network.from_dict(d)
        opt = d.get("optimizer")
        if opt is not None:
            opt = {"t": opt["t"],
                   "moments": {k: {"m": _unpack(v["m"]), "v": _unpack(v["v"])}
                               for k, v in opt["moments"].items()}}
        return net, opt, d.get("metadata", {})


def dense_stack(dims: list[int], n_classes: int, rng: np.random.Generator,
                activation: str = "leaky_relu",
                class_names: list[str] | None = None,
                input_stats: tuple[np.ndarray, np.ndarray] | None = None) -> Network:
    """Hidden stack of the given widths plus a linear softmax head.

    input_stats, when given, is a (location, scale) pair per input
    dimension; it is folded into the first layer's initial weights so the
    net starts out as if its inputs were standardized. The folded layer
    stays fully trainable and checkpoints carry the conditioning for free.
    """
    layers = []
    for i in range(len(dims) - 1):
        layers.append(Dense(dims[i], dims[i + 1], activation, rng=rng))
    layers.append(Dense(dims[-1], n_classes, "linear", rng=rng))
    if input_stats is not None:
        loc, scale = (np.asarray(a, dtype=float) for a in input_stats)
        if loc.shape != (dims[0],) or scale.shape != (dims[0],):
            raise ValueError("input_stats must match the input dimension")
        first = layers[0]
        first.W /= scale[:, None]
        first.b = -loc @ first.W
    return Network(layers, class_names)
