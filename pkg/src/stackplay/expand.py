"""Class-incremental transfer learning and the abstract flat/round head.

A base model learns three classes, then the curriculum adds one class at
a time. In dynamic mode each step inserts a fresh 25-unit hidden layer
and one softmax unit; in static mode a constant 10-layer architecture
only gains softmax units. The first two hidden layers of the original
base stay frozen throughout. Every step fine-tunes on a fixed total
budget of 600 fresh samples split evenly over the classes known so far.

The concept head reuses the grown network to answer a different
question entirely: did the object come to rest on a flat or a round
side?
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classify import ConfusionMatrix
from .nnet import Dense, Network, TrainConfig, dense_stack, train
from .simworld import (FLAT, ROUND, featurize_many, generate_freeplay,
                       get_class, label_contact, layout_stats)

BASE_CLASSES = ["cube", "sphere", "egg"]
CURRICULUM = ["cylinder", "rect_prism", "cone", "capsule", "pyramid", "small_cube"]
LR_GRID = [1e-3, 1e-4, 1e-5]
FINE_TUNE_TOTAL = 600
BASE_TOTAL = 5000
STEP_TEST_PER_CLASS = 200
NEW_LAYER_WIDTH = 25

# tags keep every data draw on its own RNG stream
_TAG_BASE, _TAG_STEP, _TAG_TEST, _TAG_CONCEPT, _TAG_PROBE = 1, 2, 3, 4, 5


def _draw_records(class_name: str, n: int, seed: int, tag: int, step: int):
    root = int(np.random.SeedSequence([seed, tag, step]).generate_state(1)[0])
    eps = generate_freeplay(class_name, n, seed=root)
    return [r for e in eps for r in e.records]


def _xy(records_by_class: dict[str, list], class_names: list[str]):
    xs, ys = [], []
    for name, recs in records_by_class.items():
        xs.append(featurize_many(recs, "freeplay"))
        ys.append(np.full(len(recs), class_names.index(name)))
    return np.vstack(xs), np.concatenate(ys)


def _stratified_split(records_by_class: dict[str, list], val_frac: float = 0.2):
    train_d, val_d = {}, {}
    for name, recs in records_by_class.items():
        n_val = int(len(recs) * val_frac)
        val_d[name] = recs[:n_val]
        train_d[name] = recs[n_val:]
    return train_d, val_d


@dataclass
class StepReport:
    step_idx: int
    new_class: str
    classes: list[str]
    accuracy: float
    confusion: ConfusionMatrix
    lr: float
    samples_per_class: int
    # fraction of old-class probes whose argmax over the old classes
    # survives the step's growth plus fine-tuning
    head_preservation: float = 1.0


@dataclass
class TransferRun:
    mode: str
    seed: int
    base_accuracy: float
    base_lr: float
    steps: list[StepReport] = field(default_factory=list)
    net: Network | None = None

    def final_accuracy(self) -> float:
        return self.steps[-1].accuracy if self.steps else self.base_accuracy

    def samples_trace(self) -> list[int]:
        return [s.samples_per_class for s in self.steps]

    def to_json(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "mode": self.mode,
            "seed": self.seed,
            "base": {"accuracy": self.base_accuracy, "lr": self.base_lr,
                     "classes": BASE_CLASSES},
            "steps": [
                {"step": s.step_idx, "new_class": s.new_class,
                 "classes": s.classes, "accuracy": s.accuracy, "lr": s.lr,
                 "samples_per_class": s.samples_per_class,
                 "head_preservation": s.head_preservation,
                 "confusion": s.confusion.counts.tolist()}
                for s in self.steps
            ],
        }
        with open(path, "w", encoding="utf-8", newline="") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
        return path


def _grid_fine_tune(make_net, records_by_class, class_names, seed, epochs,
                    patience, batch=32):
    """lr-grid search with early stopping; ties prefer the earlier grid entry."""
    train_d, val_d = _stratified_split(records_by_class)
    x_tr, y_tr = _xy(train_d, class_names)
    x_val, y_val = _xy(val_d, class_names)
    best = None
    for lr in LR_GRID:
        net = make_net()
        cfg = TrainConfig(lr=lr, batch_size=batch, epochs=epochs,
                          patience=patience, seed=seed)
        hist, _ = train(net, x_tr, y_tr, cfg, x_val, y_val)
        acc = net.accuracy(x_val, y_val)
        if best is None or acc > best[0]:
            best = (acc, lr, net)
    return best[2], best[1]


def _base_widths(mode: str) -> list[int]:
    if mode == "dynamic":
        return [200, 100, 50, 25]
    if mode == "static":
        return [200, 100, 50, 25, 25, 25, 25, 25, 25, 25]
    raise ValueError(f"unknown transfer mode {mode!r}")


def train_base(seed: int, mode: str = "dynamic", epochs: int = 100,
               patience: int = 10) -> tuple[Network, float, float]:
    """Base model over {cube, sphere, egg} from 5,000 total samples."""
    widths = _base_widths(mode)
    per = BASE_TOTAL // len(BASE_CLASSES)
    counts = [per] * len(BASE_CLASSES)
    counts[0] += BASE_TOTAL - per * len(BASE_CLASSES)  # remainder to the first class
    data = {name: _draw_records(name, c, seed, _TAG_BASE, i)
            for i, (name, c) in enumerate(zip(BASE_CLASSES, counts))}

    def make():
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB0]))
        return dense_stack([24] + widths, len(BASE_CLASSES), rng,
                           class_names=list(BASE_CLASSES),
                           input_stats=layout_stats("freeplay"))

    net, lr = _grid_fine_tune(make, data, BASE_CLASSES, seed, epochs, patience)
    test = {name: _draw_records(name, STEP_TEST_PER_CLASS, seed, _TAG_TEST, 100 + i)
            for i, name in enumerate(BASE_CLASSES)}
    x_te, y_te = _xy(test, BASE_CLASSES)
    acc = net.accuracy(x_te, y_te)
    # the first two hidden layers never move again
    net.layers[0].frozen = True
    net.layers[1].frozen = True
    return net, acc, lr


def transfer_step(net: Network, new_class: str, seed: int, step_idx: int,
                  mode: str = "dynamic", epochs: int = 100, patience: int = 10,
                  freeze_scope: str = "base_two", batch: int = 16) -> tuple[Network, StepReport]:
    """One curriculum step: grow, then fine-tune on floor(600/K) per class."""
    if new_class in net.class_names:
        raise ValueError(f"{new_class!r} is already a known class")
    if freeze_scope not in ("base_two", "all_but_new"):
        raise ValueError(f"unknown freeze_scope {freeze_scope!r}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xE1, step_idx]))
    n_old = len(net.class_names)
    probes = {name: _draw_records(name, 30, seed, _TAG_PROBE, step_idx * 16 + i)
              for i, name in enumerate(net.class_names)}
    x_probe = np.vstack([featurize_many(r, "freeplay") for r in probes.values()])
    y_probe = np.concatenate([np.full(len(r), net.class_names.index(n))
                              for n, r in probes.items()])
    probe_pred = net.predict(x_probe)
    # preservation is judged on the knowledge worth keeping: probes the
    # source model classified correctly before the step
    probe_keep = probe_pred == y_probe
    if freeze_scope == "all_but_new":
        for layer in net.layers[:-1]:
            layer.frozen = True
    net.mutate_head("add_layer_and_class" if mode == "dynamic" else "add_class",
                    rng, new_class_name=new_class)
    classes = list(net.class_names)
    k = len(classes)
    per_class = FINE_TUNE_TOTAL // k
    data = {name: _draw_records(name, per_class, seed, _TAG_STEP,
                                step_idx * 16 + i)
            for i, name in enumerate(classes)}

    start_state = net.to_dict()

    def make():
        return Network.from_dict(start_state)

    tuned, lr = _grid_fine_tune(make, data, classes, seed, epochs, patience, batch)
    # adopt the winning candidate's parameters
    net.layers = tuned.layers
    net.class_names = tuned.class_names

    test = {name: _draw_records(name, STEP_TEST_PER_CLASS, seed, _TAG_TEST,
                                step_idx * 16 + i)
            for i, name in enumerate(classes)}
    x_te, y_te = _xy(test, classes)
    pred = net.predict(x_te)
    after = np.argmax(net.forward(x_probe)[0][:, :n_old], axis=1)
    kept = after[probe_keep] == probe_pred[probe_keep]
    report = StepReport(
        step_idx=step_idx, new_class=new_class, classes=classes,
        accuracy=float((pred == y_te).mean()),
        confusion=ConfusionMatrix.from_predictions(y_te, pred, classes),
        lr=lr, samples_per_class=per_class,
        head_preservation=float(kept.mean()),
    )
    return net, report


def run_curriculum(seed: int, mode: str = "dynamic", epochs: int = 100,
                   patience: int = 10, freeze_scope: str = "base_two",
                   batch: int = 16) -> TransferRun:
    net, base_acc, base_lr = train_base(seed, mode, epochs, patience)
    run = TransferRun(mode=mode, seed=seed, base_accuracy=base_acc, base_lr=base_lr)
    for i, new_class in enumerate(CURRICULUM, start=1):
        net, report = transfer_step(net, new_class, seed, i, mode, epochs,
                                    patience, freeze_scope, batch)
        run.steps.append(report)
    run.net = net
    return run


# --- flat/round concept head ---------------------------------------------


@dataclass
class ConceptResult:
    net: Network
    accuracy: float
    lr: float
    test_records: list
    predictions: list[str]


def _draw_concept_pool(seed: int, n_flat: int, n_round: int, tag_step: int,
                       balanced: bool = True):
    """Fill both label buckets. Balanced mode spreads each bucket evenly
    over the classes able to produce the label, so e.g. flat-resting
    cylinders are not crowded out by the boxy classes; unbalanced mode
    keeps the natural arrival mix."""
    classes = BASE_CLASSES + CURRICULUM
    producers = {
        lab: [c for c in classes
              if any(r.contact == lab for r in get_class(c).rests)]
        for lab in (FLAT, ROUND)
    }
    want = {FLAT: n_flat, ROUND: n_round}
    if balanced:
        quota = {lab: -(-want[lab] // len(producers[lab])) for lab in want}
    else:
        quota = {lab: want[lab] for lab in want}
    buckets: dict[str, list] = {FLAT: [], ROUND: []}
    counts = {lab: {c: 0 for c in classes} for lab in want}
    chunk = 0
    while any(len(buckets[lab]) < want[lab] for lab in want):
        for i, name in enumerate(classes):
            for rec in _draw_records(name, 40, seed, _TAG_CONCEPT,
                                     tag_step * 1000 + chunk * 16 + i):
                lab = label_contact(name, rec.post_rotation)
                if (len(buckets[lab]) < want[lab]
                        and counts[lab][name] < quota[lab]):
                    buckets[lab].append(rec)
                    counts[lab][name] += 1
        chunk += 1
        if chunk > 200:
            raise RuntimeError("could not fill flat/round sample buckets")
    return buckets[FLAT], buckets[ROUND]


def concept_labels(records) -> np.ndarray:
    return np.array([0 if label_contact(r.theme_class, r.post_rotation) == FLAT else 1
                     for r in records])


def train_concept_head(source: Network, seed: int, epochs: int = 100,
                       patience: int = 10) -> ConceptResult:
    """Binary flat/round head on top of the grown source network."""
    flat, rnd = _draw_concept_pool(seed, 300, 300, 0)
    if len(flat) != 300 or len(rnd) != 300:
        raise ValueError(f"need exactly 300/300 samples, got {len(flat)}/{len(rnd)}")
    tflat, trnd = _draw_concept_pool(seed, 60, 60, 1, balanced=False)
    test = tflat + trnd

    base_state = source.to_dict()

    def make():
        net = Network.from_dict(base_state)
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC0]))
        head = net.head
        grown = Dense(head.in_dim, NEW_LAYER_WIDTH, activation="leaky_relu",
                      rng=rng, init_scale=0.1)
        net.layers[-1] = grown  # replace the 9-way head
        net.layers.append(Dense(NEW_LAYER_WIDTH, 2, activation="linear", rng=rng))
        net.class_names = [FLAT, ROUND]
        return net

    data = {FLAT: flat, ROUND: rnd}
    train_d, val_d = _stratified_split(data)

    def xy(d):
        recs = d[FLAT] + d[ROUND]
        x = featurize_many(recs, "freeplay")
        y = np.array([0] * len(d[FLAT]) + [1] * len(d[ROUND]))
        return x, y

    x_tr, y_tr = xy(train_d)
    x_val, y_val = xy(val_d)
    best = None
    for lr in LR_GRID:
        net = make()
        cfg = TrainConfig(lr=lr, batch_size=32, epochs=epochs,
                          patience=patience, seed=seed)
        train(net, x_tr, y_tr, cfg, x_val, y_val)
        acc = net.accuracy(x_val, y_val)
        if best is None or acc > best[0]:
            best = (acc, lr, net)
    net, lr = best[2], best[1]

    x_te = featurize_many(test, "freeplay")
    y_te = np.array([0] * len(tflat) + [1] * len(trnd))
    pred = net.predict(x_te)
    names = [FLAT, ROUND]
    return ConceptResult(net, float((pred == y_te).mean()), lr, test,
                         [names[p] for p in pred])


def predict_concept(net: Network, records) -> list[str]:
    x = featurize_many(records, "freeplay")
    names = [FLAT, ROUND]
    return [names[p] for p in net.predict(x)]
