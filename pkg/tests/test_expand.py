"""Curriculum transfer learning and the flat/round concept head."""

import numpy as np
import pytest

from stackplay.expand import (
    BASE_CLASSES,
    CURRICULUM,
    LR_GRID,
    _draw_concept_pool,
    _draw_records,
    predict_concept,
    run_curriculum,
    train_base,
    train_concept_head,
    transfer_step,
)
from stackplay.nnet import Network
from stackplay.simworld import FLAT, ROUND, featurize_many, label_contact
from stackplay.simworld.geometry import tilted_rotation
from stackplay.simworld.objects import get_class
from stackplay.simworld.physics import place_and_settle, sample_start_pose
from stackplay.simworld.records import PlacementAction, Pose


@pytest.fixture(scope="module")
def dynamic_run():
    return run_curriculum(seed=0, mode="dynamic")


@pytest.fixture(scope="module")
def static_run():
    return run_curriculum(seed=0, mode="static")


def test_base_model_shape_and_accuracy():
    net, acc, lr = train_base(3, "dynamic")
    assert acc >= 0.90
    assert lr in LR_GRID
    widths = [l.out_dim for l in net.layers]
    assert widths == [200, 100, 50, 25, 3]
    assert net.layers[0].frozen and net.layers[1].frozen
    assert not net.layers[2].frozen


def test_transfer_step_rejects_known_class():
    net, _, _ = train_base(3, "dynamic")
    with pytest.raises(ValueError):
        transfer_step(net, "egg", 3, 1, "dynamic")


def test_dynamic_curriculum_structure(dynamic_run):
    run = dynamic_run
    assert [s.new_class for s in run.steps] == CURRICULUM
    assert run.samples_trace() == [600 // k for k in range(4, 10)]
    # 4 base hidden + 6 added hidden + head
    assert len(run.net.layers) == 11
    assert run.net.head.out_dim == 9
    assert run.net.class_names == BASE_CLASSES + CURRICULUM


def test_dynamic_final_accuracy(dynamic_run):
    assert dynamic_run.final_accuracy() >= 0.75


def test_frozen_layers_bit_identical(dynamic_run):
    # regrowing the same base reproduces the exact frozen weights
    base, _, _ = train_base(0, "dynamic")
    for k in (0, 1):
        assert np.array_equal(base.layers[k].W, dynamic_run.net.layers[k].W)
        assert np.array_equal(base.layers[k].b, dynamic_run.net.layers[k].b)


def test_head_preservation_each_step(dynamic_run):
    for step in dynamic_run.steps:
        assert step.head_preservation >= 0.8


def test_static_curriculum_structure(static_run):
    run = static_run
    assert all(len(s.classes) == 3 + s.step_idx for s in run.steps)
    assert len(run.net.layers) == 11
    assert run.net.head.out_dim == 9
    # static only ever grows the softmax layer
    assert [l.out_dim for l in run.net.layers[:-1]] == [200, 100, 50] + [25] * 7


def test_step_reports_serializable(tmp_path, dynamic_run):
    path = dynamic_run.to_json(tmp_path / "transfer_report.json")
    text = path.read_text(encoding="utf-8")
    assert '"head_preservation"' in text
    assert '"samples_per_class": 66' in text


def test_draw_records_deterministic():
    a = _draw_records("cone", 40, 5, 2, 7)
    b = _draw_records("cone", 40, 5, 2, 7)
    xa = featurize_many(a, "freeplay")
    xb = featurize_many(b, "freeplay")
    assert np.array_equal(xa, xb)


def test_concept_pool_sizes_and_labels():
    flat, rnd = _draw_concept_pool(2, 50, 50, 9)
    assert len(flat) == 50 and len(rnd) == 50
    assert all(label_contact(r.theme_class, r.post_rotation) == FLAT for r in flat)
    assert all(label_contact(r.theme_class, r.post_rotation) == ROUND for r in rnd)


def test_concept_head(dynamic_run):
    result = train_concept_head(dynamic_run.net, seed=0)
    assert len(result.test_records) == 120
    assert result.accuracy >= 0.95
    # accuracy is measured against the label_contact oracle, so oracle
    # agreement equals the reported accuracy
    truth = [label_contact(r.theme_class, r.post_rotation) for r in result.test_records]
    agree = np.mean([p == t for p, t in zip(result.predictions, truth)])
    assert agree == pytest.approx(result.accuracy)
    # the source network is not modified
    assert dynamic_run.net.head.out_dim == 9

    # single cylinder resting upright must read as flat
    cyl = get_class("cylinder")
    rng = np.random.default_rng(0)
    pose = Pose.from_rotation(tilted_rotation(0.0, 1.0, 0.2))
    rec = place_and_settle(cyl, pose, PlacementAction(np.array([0.05, -0.05])), rng)
    rec.post_rotation = pose.rotation.copy()
    rec.post_up_offset = 0.0
    assert predict_concept(result.net, [rec]) == [FLAT]

    # every capsule that rolled off the stack reads as round (the rare
    # survivor that balances on an end is indistinguishable from an
    # upright cylinder, so only toppled placements are probed)
    cap = get_class("capsule")
    caps = []
    while len(caps) < 25:
        start = sample_start_pose(cap, rng)
        rec = place_and_settle(
            cap, start, PlacementAction(rng.uniform(-0.7, 0.7, size=2)), rng)
        if not rec.supported and rec.start_up_offset < 2.0:
            caps.append(rec)
    assert predict_concept(result.net, caps) == [ROUND] * 25
