"""Analytic placement-and-settling model.

The destination is always a cube of half extent DEST_HALF sitting on the
floor. A placement action names a point on its top face in world units;
the theme object is released above that point in a rest orientation,
lands in that orientation, receives a jitter nudge, and either stays or
ends up beside the destination.

Stability rules:
  * the center of mass must project into the contact patch (theme
    footprint intersected with the destination top face) shrunk on every
    side by the jitter margin, otherwise the object falls no matter what
    it landed on;
  * a flat contact that passes the test stays put;
  * a round contact that passes the test still rolls off with the
    class/orientation probability from the rolling table.

Fallen objects pick their next orientation from the class transition
table and come to rest beside the destination; missed placements drop
straight to the floor near the release point.

Random draws happen in a fixed order (jitter angle, roll, transition,
tilt branch, heading, spin, reach/drift) so generated data is stable
against refactoring.
"""

from __future__ import annotations

import numpy as np

from .geometry import (
    perpendicular_unit,
    tilted_rotation,
    up_offset_of,
    wrap_angle,
    world_axis,
)
from .objects import FLAT, ObjectClass, RestOrientation
from .records import AttemptRecord, PlacementAction, Pose

DEST_HALF = 0.5
# shrink applied to each side of the contact patch, in destination
# half-extent units
JITTER_MARGIN = 0.05
# clearance between destination top and theme bottom at release
DROP_GAP = 0.5


def support_patch(offset: float, theme_half: float, dest_half: float = DEST_HALF):
    """Per-axis contact interval, or None when the footprints miss."""
    lo = max(offset - theme_half, -dest_half)
    hi = min(offset + theme_half, dest_half)
    if lo > hi:
        return None
    return lo, hi


def com_inside(offset_xz: np.ndarray, footprint: tuple[float, float],
               dest_half: float = DEST_HALF, margin: float = JITTER_MARGIN) -> bool:
    """Center-of-mass containment test against the shrunk contact patch."""
    shrink = margin * dest_half
    for off, half in zip(offset_xz, footprint):
        patch = support_patch(float(off), half, dest_half)
        if patch is None:
            return False
        lo, hi = patch[0] + shrink, patch[1] - shrink
        if not lo <= off <= hi:
            return False
    return True


def _bounding_footprint(cls: ObjectClass, rest: RestOrientation) -> tuple[float, float]:
    # XZ extent of the landed object, axis-aligned approximation; tilted
    # rests use the bounding radius since heading is arbitrary.
    if rest.up_offset < 1e-9 or abs(rest.up_offset - np.pi) < 1e-9:
        return float(cls.half_extents[0]), float(cls.half_extents[2])
    m = float(np.max(cls.half_extents))
    return m, m


def _contact_footprint(cls: ObjectClass, rest: RestOrientation) -> tuple[float, float]:
    if rest.contact == FLAT and rest.footprint is not None:
        return rest.footprint
    return _bounding_footprint(cls, rest)


def apply_jitter(cls: ObjectClass, pose: Pose, rng: np.random.Generator) -> np.ndarray:
    """Unit nudge direction: perpendicular to the world symmetry axis, or
    horizontal for classes with no symmetry axis."""
    angle = rng.uniform(0.0, 2.0 * np.pi)
    local = cls.local_sym_axis()
    if local is None:
        return np.array([np.cos(angle), 0.0, np.sin(angle)])
    axis = world_axis(pose.rotation, local)
    return perpendicular_unit(axis, angle)


def _sample_rest_rotation(cls: ObjectClass, rest: RestOrientation,
                          rng: np.random.Generator) -> np.ndarray:
    tilts = rest.tilts()
    tilt = tilts[int(rng.integers(len(tilts)))] if len(tilts) > 1 else tilts[0]
    heading = rng.uniform(0.0, 2.0 * np.pi)
    spin = rng.uniform(0.0, 2.0 * np.pi)
    return tilted_rotation(tilt, heading, spin)


def sample_start_pose(cls: ObjectClass, rng: np.random.Generator) -> Pose:
    """Random rest pose, uniform over the class's rest orientations."""
    rest = cls.rests[int(rng.integers(len(cls.rests)))]
    return Pose.from_rotation(_sample_rest_rotation(cls, rest, rng))


def _pick_transition(rest: RestOrientation, rng: np.random.Generator) -> str:
    u = rng.uniform()
    acc = 0.0
    for label, p in rest.transitions:
        acc += p
        if u < acc:
            return label
    return rest.transitions[-1][0]


def _fall_direction(offset_xz: np.ndarray, jitter: np.ndarray,
                    rng: np.random.Generator) -> np.ndarray:
    if np.linalg.norm(offset_xz) > 0.05:
        return offset_xz / np.linalg.norm(offset_xz)
    jxz = jitter[[0, 2]]
    if np.linalg.norm(jxz) > 1e-9:
        return jxz / np.linalg.norm(jxz)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    return np.array([np.cos(angle), np.sin(angle)])


def place_and_settle(cls: ObjectClass, pose: Pose, action: PlacementAction,
                     rng: np.random.Generator) -> AttemptRecord:
    """Simulate one placement attempt and log it."""
    action.validate()
    pose.validate()
    land = cls.rest_for_up_offset(pose.up_offset)  # raises on non-rest pose

    offset = action.coord.astype(float)  # world units on the top face
    jitter = apply_jitter(cls, pose, rng)

    touching = all(
        support_patch(float(o), h) is not None
        for o, h in zip(offset, _bounding_footprint(cls, land))
    )
    stable = touching and com_inside(offset, _contact_footprint(cls, land))
    if stable and land.contact != FLAT:
        stable = rng.uniform() >= land.roll_probability

    start_rh = land.rest_height
    before = np.array([offset[0], DEST_HALF + start_rh + DROP_GAP, offset[1]])
    if touching:
        after = np.array([offset[0], DEST_HALF + start_rh, offset[1]])
    else:
        after = np.array([offset[0], start_rh - DEST_HALF, offset[1]])

    if stable:
        post_rot = pose.rotation.copy()
        settled = after.copy()
    else:
        nxt = cls.rest(_pick_transition(land, rng))
        post_rot = _sample_rest_rotation(cls, nxt, rng)
        settled_y = nxt.rest_height - DEST_HALF
        if touching:
            # knocked off the stack: travels outward past the destination edge
            direction = _fall_direction(offset, jitter, rng)
            reach = rng.uniform(*land.fall_reach)
            dist = DEST_HALF + reach
            settled = np.array([direction[0] * dist, settled_y, direction[1] * dist])
        else:
            drift = jitter[[0, 2]] * rng.uniform(0.0, 0.1)
            settled = np.array([offset[0] + drift[0], settled_y, offset[1] + drift[1]])

    return AttemptRecord(
        theme_class=cls.name,
        start_rotation=pose.rotation.copy(),
        start_up_offset=pose.up_offset,
        action=offset.copy(),
        post_rotation=wrap_angle(post_rot),
        post_up_offset=float(up_offset_of(post_rot)),
        jitter=jitter,
        rel_pos_before=before / DEST_HALF,
        rel_pos_after=after / DEST_HALF,
        rel_pos_settled=settled / DEST_HALF,
        supported=bool(stable),
        touching=bool(touching),
        stack_height=2 if stable else 1,
    )
