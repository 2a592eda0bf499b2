import numpy as np
import pytest

from stackplay.classify import (
    ConfusionMatrix,
    MdsEmbedding,
    export_confusion,
    export_mds,
    mds_embed,
    split_freeplay,
    train_baseline,
)
from stackplay.simworld import CLASS_NAMES, generate_freeplay


@pytest.fixture(scope="module")
def small_split():
    eps = {c: generate_freeplay(c, 300, seed=21) for c in CLASS_NAMES}
    return split_freeplay(eps, train_per_class=200, test_per_class=100)


def test_confusion_matrix_counts_and_accuracy():
    y_true = [0, 0, 1, 1, 2, 2]
    y_pred = [0, 1, 1, 1, 2, 0]
    cm = ConfusionMatrix.from_predictions(y_true, y_pred, ["a", "b", "c"])
    assert cm.counts.sum(axis=1).tolist() == [2, 2, 2]
    assert cm.accuracy() == pytest.approx(4 / 6)
    assert cm.pair_confusion("a", "b") == 1
    assert cm.pair_confusion("a", "c") == 1


def test_confusion_csv_order(tmp_path):
    cm = ConfusionMatrix(np.arange(9).reshape(3, 3), ["x", "y", "z"])
    path = cm.to_csv(tmp_path / "cm.csv")
    lines = path.read_text().splitlines()
    assert lines[0].split(",")[1:] == ["x", "y", "z"]
    assert [l.split(",")[0] for l in lines[1:]] == ["x", "y", "z"]
    # re-export is byte-identical
    data = path.read_bytes()
    cm.to_csv(tmp_path / "cm.csv")
    assert path.read_bytes() == data


def test_mds_collinear_points_exact():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    emb = mds_embed(pts)
    d = np.linalg.norm(emb.coords[:, None] - emb.coords[None, :], axis=-1)
    expect = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    assert np.allclose(d, expect, atol=1e-9)
    assert emb.stress < 1e-9


def test_mds_identical_points_zero():
    pts = np.ones((5, 4))
    emb = mds_embed(pts)
    assert np.allclose(emb.coords, 0.0)


def test_mds_reproduces_planar_distances():
    rng = np.random.default_rng(40)
    pts = rng.normal(size=(30, 2))
    emb = mds_embed(pts)
    d_in = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    d_out = np.linalg.norm(emb.coords[:, None] - emb.coords[None, :], axis=-1)
    assert np.allclose(d_in, d_out, atol=1e-9)


def test_mds_deterministic_sign():
    rng = np.random.default_rng(41)
    pts = rng.normal(size=(12, 6))
    a = mds_embed(pts).coords
    b = mds_embed(pts).coords
    assert np.array_equal(a, b)


def test_mds_requires_three_points():
    with pytest.raises(ValueError):
        mds_embed(np.zeros((2, 3)))


def test_split_sizes(small_split):
    train, test = small_split
    assert len(train) == 9 and len(test) == 9
    for _, recs in train:
        assert len(recs) == 200
    for _, recs in test:
        assert len(recs) == 100


def test_split_insufficient_records():
    eps = {"cube": generate_freeplay("cube", 100, seed=1)}
    with pytest.raises(ValueError):
        split_freeplay(eps, train_per_class=200, test_per_class=100)


def test_memorizes_tiny_duplicated_set(small_split):
    train, _ = small_split
    nine = [(name, recs[:1] * 20) for name, recs in train]
    res = train_baseline(nine, nine, seed=3, epochs=400)
    assert res.accuracy == 1.0


def test_shuffled_labels_give_chance_accuracy(small_split):
    train, test = small_split
    rng = np.random.default_rng(42)
    # shuffle class identities: reassign each record bucket a random label
    names = [n for n, _ in train]
    all_train = [r for _, recs in train for r in recs]
    perm = rng.permutation(len(all_train))
    shuffled = [(name, [all_train[perm[i * 200 + j]] for j in range(200)])
                for i, name in enumerate(names)]
    res = train_baseline(shuffled, test, seed=4, epochs=30)
    assert abs(res.accuracy - 1.0 / 9) <= 0.03


def test_export_plots_deterministic(tmp_path, small_split):
    train, test = small_split
    res = train_baseline(train[:3], test[:3],
                         class_names=[n for n, _ in train[:3]], seed=5, epochs=20)
    out = export_confusion(res.confusion, tmp_path)
    first = out["svg"].read_bytes()
    export_confusion(res.confusion, tmp_path)
    assert out["svg"].read_bytes() == first

    emb = MdsEmbedding(np.random.default_rng(6).normal(size=(10, 2)), 0.1,
                       labels_true=["a"] * 5 + ["b"] * 5,
                       labels_pred=["a"] * 5 + ["b"] * 5)
    files = export_mds(emb, tmp_path)
    assert files["csv"].read_text().count("\n") == 11
    data = files["svg"].read_bytes()
    export_mds(emb, tmp_path)
    assert files["svg"].read_bytes() == data
