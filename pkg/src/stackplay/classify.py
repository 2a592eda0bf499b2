"""Nine-way behavior classifier over free-play records, with confusion
matrices and a classical MDS view of the last hidden layer.

The classifier never sees geometry, only what the object did: orientation
angles before and after placement, the jitter direction, where the object
ended up, and whether the stack survived.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .nnet import Network, TrainConfig, dense_stack, train
from .plots import svg_heatmap, svg_scatter
from .simworld import CLASS_NAMES, Episode, featurize_many, layout_stats

BASELINE_HIDDEN = [200, 100, 50, 25]
TRAIN_PER_CLASS = 1600
TEST_PER_CLASS = 400


@dataclass
class ConfusionMatrix:
    counts: np.ndarray
    class_names: list[str]

    @classmethod
    def from_predictions(cls, y_true, y_pred, class_names) -> "ConfusionMatrix":
        k = len(class_names)
        counts = np.zeros((k, k), dtype=int)
        for t, p in zip(y_true, y_pred):
            counts[t, p] += 1
        return cls(counts, list(class_names))

    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())

    def pair_confusion(self, a: str, b: str) -> int:
        """Total confusions between two classes, both directions."""
        i, j = self.class_names.index(a), self.class_names.index(b)
        return int(self.counts[i, j] + self.counts[j, i])

    def to_csv(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("true\\pred," + ",".join(self.class_names) + "\n")
            for name, row in zip(self.class_names, self.counts):
                f.write(name + "," + ",".join(str(int(v)) for v in row) + "\n")
        return path


@dataclass
class MdsEmbedding:
    coords: np.ndarray          # n x 2
    stress: float
    labels_true: list[str] = field(default_factory=list)
    labels_pred: list[str] = field(default_factory=list)


@dataclass
class BaselineResult:
    net: Network
    accuracy: float
    confusion: ConfusionMatrix
    train_loss: list[float]


def episodes_to_xy(episodes: list[Episode], class_names: list[str],
                   layout: str = "freeplay"):
    records = [r for ep in episodes for r in ep.records]
    x = featurize_many(records, layout)
    y = np.array([class_names.index(r.theme_class) for r in records])
    return x, y


def split_freeplay(episodes_by_class: dict[str, list[Episode]],
                   train_per_class: int = TRAIN_PER_CLASS,
                   test_per_class: int = TEST_PER_CLASS):
    """First train_per_class records per class train, next test_per_class test."""
    train_eps: list = []
    test_eps: list = []
    for name, eps in episodes_by_class.items():
        records = [r for ep in eps for r in ep.records]
        need = train_per_class + test_per_class
        if len(records) < need:
            raise ValueError(f"{name}: {len(records)} records < required {need}")
        split_train = records[:train_per_class]
        split_test = records[train_per_class:need]
        train_eps.append((name, split_train))
        test_eps.append((name, split_test))
    return train_eps, test_eps


def _stack_xy(named_records, class_names, layout="freeplay"):
    xs, ys = [], []
    for name, records in named_records:
        xs.append(featurize_many(records, layout))
        ys.append(np.full(len(records), class_names.index(name)))
    return np.vstack(xs), np.concatenate(ys)


def make_baseline_net(rng: np.random.Generator, in_dim: int = 24,
                      class_names: list[str] | None = None) -> Network:
    names = class_names if class_names is not None else list(CLASS_NAMES)
    stats = layout_stats("freeplay") if in_dim == 24 else None
    return dense_stack([in_dim] + BASELINE_HIDDEN, len(names), rng,
                       class_names=names, input_stats=stats)


def train_baseline(train_records, test_records, seed: int = 0,
                   class_names: list[str] | None = None,
                   epochs: int = 200) -> BaselineResult:
    names = class_names if class_names is not None else list(CLASS_NAMES)
    x_tr, y_tr = _stack_xy(train_records, names)
    x_te, y_te = _stack_xy(test_records, names)
    net = make_baseline_net(np.random.default_rng(np.random.SeedSequence([seed, 0xBA5E])),
                            in_dim=x_tr.shape[1], class_names=names)
    cfg = TrainConfig(lr=1e-4, batch_size=32, epochs=epochs,
                      weight_decay=0.01, seed=seed)
    hist, _ = train(net, x_tr, y_tr, cfg)
    pred = net.predict(x_te)
    confusion = ConfusionMatrix.from_predictions(y_te, pred, names)
    return BaselineResult(net, float((pred == y_te).mean()), confusion,
                          hist.train_loss)


def mds_embed(points: np.ndarray, dims: int = 2) -> MdsEmbedding:
    """Classical (Torgerson) MDS of row vectors down to `dims`."""
    x = np.asarray(points, dtype=float)
    n = x.shape[0]
    if n < 3:
        raise ValueError("need at least 3 points")
    d2 = np.square(np.linalg.norm(x[:, None, :] - x[None, :, :], axis=-1))
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ d2 @ j
    b = (b + b.T) / 2.0
    vals, vecs = np.linalg.eigh(b)
    order = np.argsort(vals)[::-1][:dims]
    coords = np.zeros((n, dims))
    kept = []
    for k, idx in enumerate(order):
        lam = vals[idx]
        if lam <= 1e-10:
            continue  # rank-deficient input: leave the column at zero
        v = vecs[:, idx]
        pivot = np.argmax(np.abs(v))
        if v[pivot] < 0:  # deterministic sign
            v = -v
        coords[:, k] = v * np.sqrt(lam)
        kept.append(idx)
    orig = np.sqrt(np.maximum(d2, 0.0))
    emb = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=-1)
    denom = np.square(orig).sum()
    stress = float(np.sqrt(np.square(orig - emb).sum() / denom)) if denom > 0 else 0.0
    return MdsEmbedding(coords, stress)


def export_confusion(confusion: ConfusionMatrix, out_dir: Path | str,
                     stem: str = "confusion") -> dict[str, Path]:
    out_dir = Path(out_dir)
    csv_path = confusion.to_csv(out_dir / f"{stem}.csv")
    svg_path = svg_heatmap(out_dir / f"{stem}.svg", confusion.counts,
                           confusion.class_names, confusion.class_names,
                           title="behavior classifier confusion")
    return {"csv": csv_path, "svg": svg_path}


def export_mds(emb: MdsEmbedding, out_dir: Path | str,
               stem: str = "mds") -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        f.write("x,y,true_label,predicted_label\n")
        for (x, y), t, p in zip(emb.coords, emb.labels_true, emb.labels_pred):
            f.write(f"{x!r},{y!r},{t},{p}\n")
    svg_path = svg_scatter(out_dir / f"{stem}.svg", emb.coords, emb.labels_true,
                           title=f"last-hidden-layer MDS (stress {emb.stress:.3f})")
    return {"csv": csv_path, "svg": svg_path}


def export_metrics(result: BaselineResult, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    counts = result.confusion.counts
    per_class = {}
    for i, name in enumerate(result.confusion.class_names):
        tp = int(counts[i, i])
        fp = int(counts[:, i].sum() - tp)
        fn = int(counts[i, :].sum() - tp)
        per_class[name] = {
            "precision": tp / (tp + fp) if tp + fp else 0.0,
            "recall": tp / (tp + fn) if tp + fn else 0.0,
            "support": int(counts[i, :].sum()),
        }
    payload = {"accuracy": result.accuracy, "per_class": per_class}
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path
