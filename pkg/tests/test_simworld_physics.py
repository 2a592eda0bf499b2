import numpy as np
import pytest

from stackplay.simworld import (
    FLAT,
    ROUND,
    PlacementAction,
    Pose,
    apply_jitter,
    get_class,
    label_contact,
    place_and_settle,
    sample_start_pose,
)
from stackplay.simworld.geometry import tilted_rotation, world_axis
from stackplay.simworld.physics import DEST_HALF, JITTER_MARGIN, com_inside, support_patch


def oracle_patch(offset, theme_half, dest_half):
    """Independent interval intersection used to pin the support oracle."""
    pts = [max(offset - theme_half, -dest_half), min(offset + theme_half, dest_half)]
    return None if pts[0] > pts[1] else tuple(pts)


UPRIGHT = Pose.from_rotation([0.0, 0.0, 0.0])


def _pose(cls_name, label, heading=0.7, spin=1.3, branch=0):
    rest = get_class(cls_name).rest(label)
    tilt = rest.tilts()[branch % len(rest.tilts())]
    return Pose.from_rotation(tilted_rotation(tilt, heading, spin))


def test_support_patch_matches_oracle():
    rng = np.random.default_rng(11)
    for _ in range(500):
        a = rng.uniform(-1.5, 1.5)
        t = rng.uniform(0.1, 0.9)
        assert support_patch(a, t) == oracle_patch(a, t, DEST_HALF)


def test_offcenter_action_patch_frozen_values():
    # cube at x-offset 0.6: patch is exactly [0.1, 0.5] and the CoM falls outside
    patch = support_patch(0.6, 0.5)
    assert patch == pytest.approx((0.1, 0.5), abs=1e-12)
    assert not com_inside(np.array([0.6, 0.0]), (0.5, 0.5))
    rec = place_and_settle(get_class("cube"), UPRIGHT,
                           PlacementAction([0.6, 0.0]), np.random.default_rng(0))
    assert not rec.supported
    assert rec.touching


def test_centered_cube_is_supported():
    rec = place_and_settle(get_class("cube"), UPRIGHT,
                           PlacementAction([0.0, 0.0]), np.random.default_rng(0))
    assert rec.supported
    assert rec.stack_height == 2
    assert rec.rel_pos_settled[1] > 0


def test_flat_support_threshold():
    # margin 0.05 of the 0.5 destination half extent -> CoM bound at 0.475
    cube = get_class("cube")
    near = place_and_settle(cube, UPRIGHT, PlacementAction([0.474, 0.0]),
                            np.random.default_rng(1))
    far = place_and_settle(cube, UPRIGHT, PlacementAction([0.476, 0.0]),
                           np.random.default_rng(1))
    assert near.supported and not far.supported


def test_sphere_never_supported():
    sphere = get_class("sphere")
    rng = np.random.default_rng(2)
    for _ in range(100):
        a = np.clip(rng.uniform(-1, 1, 2), -0.999, 0.999)
        rec = place_and_settle(sphere, sample_start_pose(sphere, rng),
                               PlacementAction(a), rng)
        assert not rec.supported


def test_small_cube_can_miss_entirely():
    sc = get_class("small_cube")
    rec = place_and_settle(sc, UPRIGHT, PlacementAction([0.8, 0.0]),
                           np.random.default_rng(3))
    assert not rec.touching and not rec.supported
    # settled near the drop point, not pushed past the destination edge
    assert abs(rec.rel_pos_settled[0] * DEST_HALF - 0.8) < 0.15


def test_rejects_non_rest_pose_and_bad_action():
    cube = get_class("cube")
    with pytest.raises(ValueError):
        place_and_settle(cube, Pose.from_rotation([0.3, 0.0, 0.0]),
                         PlacementAction([0.0, 0.0]), np.random.default_rng(0))
    with pytest.raises(ValueError):
        place_and_settle(cube, UPRIGHT, PlacementAction([1.2, 0.0]),
                         np.random.default_rng(0))


def test_jitter_horizontal_for_asymmetric_classes():
    rng = np.random.default_rng(4)
    for name in ["cube", "sphere", "small_cube"]:
        cls = get_class(name)
        for _ in range(20):
            j = apply_jitter(cls, sample_start_pose(cls, rng), rng)
            assert j[1] == 0.0
            assert np.isclose(np.linalg.norm(j), 1.0, atol=1e-12)


def test_jitter_perpendicular_to_world_sym_axis():
    rng = np.random.default_rng(5)
    for name in ["cylinder", "capsule", "cone", "pyramid", "egg", "rect_prism"]:
        cls = get_class(name)
        for _ in range(30):
            pose = sample_start_pose(cls, rng)
            j = apply_jitter(cls, pose, rng)
            axis = world_axis(pose.rotation, cls.local_sym_axis())
            assert abs(float(j @ axis)) < 1e-9


def test_upright_cylinder_jitter_y_is_zero():
    cyl = get_class("cylinder")
    rng = np.random.default_rng(6)
    pose = Pose.from_rotation([0.0, 1.1, 0.0])
    for _ in range(20):
        assert apply_jitter(cyl, pose, rng)[1] == 0.0


def test_horizontal_cylinder_jitter_perp_to_world_x():
    # heading pi/2 lays the symmetry axis along world X
    cyl = get_class("cylinder")
    pose = Pose.from_rotation(tilted_rotation(np.pi / 2, np.pi / 2, 0.0))
    rng = np.random.default_rng(7)
    for _ in range(20):
        assert abs(apply_jitter(cyl, pose, rng)[0]) < 1e-9


def test_label_contact_table():
    up0 = tilted_rotation(0.0, 0.4, 0.9)
    assert label_contact("cylinder", up0) == FLAT
    assert label_contact("cylinder", tilted_rotation(np.pi, 0.2, 0.0)) == FLAT
    assert label_contact("cylinder", tilted_rotation(np.pi / 2, 1.0, 2.0)) == ROUND
    assert label_contact("cylinder", tilted_rotation(3 * np.pi / 2, 1.0, 2.0)) == ROUND
    assert label_contact("cone", up0) == FLAT
    assert label_contact("cone", tilted_rotation(2 * np.pi / 3, 0.8, 0.1)) == ROUND
    for name in ["sphere", "egg", "capsule"]:
        cls = get_class(name)
        for rest in cls.rests:
            rot = tilted_rotation(rest.tilts()[0], 0.5, 0.5)
            assert label_contact(name, rot) == ROUND
    for name in ["cube", "small_cube", "rect_prism", "pyramid"]:
        cls = get_class(name)
        for rest in cls.rests:
            rot = tilted_rotation(rest.tilts()[0], 0.5, 0.5)
            assert label_contact(name, rot) == FLAT


def test_label_contact_rejects_non_rest_rotation():
    with pytest.raises(ValueError):
        label_contact("cylinder", np.array([0.4, 0.0, 0.0]))


def test_cone_side_rest_angle():
    assert abs(get_class("cone").rest("side").up_offset - 2 * np.pi / 3) < 1e-12


def test_supported_round_contact_is_possible_but_rare():
    # capsule balanced on a round end: survives the roll draw 2% of the time
    capsule = get_class("capsule")
    pose = _pose("capsule", "upright")
    rng = np.random.default_rng(8)
    n = 2000
    kept = sum(
        place_and_settle(capsule, pose, PlacementAction([0.0, 0.0]), rng).supported
        for _ in range(n)
    )
    assert 0 < kept / n < 0.06
