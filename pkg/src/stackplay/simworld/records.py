"""Record types produced by the stacking world.

Positions are logged relative to the destination object, in destination
half-extent units. Rotations are Euler XYZ in radians wrapped to
[0, 2pi); up offsets are folded into [0, pi].
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import up_offset_of, wrap_angle
from .objects import ObjectClass

STACKED = "stacked"
EXHAUSTED = "exhausted"

MAX_ATTEMPTS = 10


def _vec(x, n):
    a = np.asarray(x, dtype=float).reshape(-1)
    if a.shape != (n,):
        raise ValueError(f"expected {n}-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Pose:
    """Position + orientation of an object, with the cached up offset."""

    position: np.ndarray
    rotation: np.ndarray
    up_offset: float

    @classmethod
    def from_rotation(cls, rotation, position=(0.0, 0.0, 0.0)) -> "Pose":
        rot = wrap_angle(_vec(rotation, 3))
        return cls(_vec(position, 3), rot, float(up_offset_of(rot)))

    def validate(self) -> None:
        if not 0.0 <= self.up_offset <= np.pi + 1e-12:
            raise ValueError(f"up_offset {self.up_offset} outside [0, pi]")
        if abs(up_offset_of(self.rotation) - self.up_offset) > 1e-9:
            raise ValueError("up_offset inconsistent with rotation")


@dataclass(frozen=True)
class PlacementAction:
    """Target coordinate on the destination top face, both axes in (-1, 1)."""

    coord: np.ndarray

    def __init__(self, coord):
        object.__setattr__(self, "coord", _vec(coord, 2))

    def validate(self) -> None:
        if not np.all(np.abs(self.coord) < 1.0):
            raise ValueError(f"action {self.coord.tolist()} outside the open square (-1,1)^2")


@dataclass
class AttemptRecord:
    """Everything logged about one placement attempt."""

    theme_class: str
    start_rotation: np.ndarray
    start_up_offset: float
    action: np.ndarray
    post_rotation: np.ndarray
    post_up_offset: float
    jitter: np.ndarray
    rel_pos_before: np.ndarray
    rel_pos_after: np.ndarray
    rel_pos_settled: np.ndarray
    supported: bool
    touching: bool
    reward: float = 0.0
    cum_reward: float = 0.0
    mean_reward: float = 0.0
    stack_height: int = 1
    episode_id: int = 0
    attempt_idx: int = 0

    def validate(self, cls: ObjectClass) -> None:
        if abs(np.linalg.norm(self.jitter) - 1.0) > 1e-9:
            raise ValueError("jitter must be a unit vector")
        if self.supported and not (self.stack_height == 2 and self.rel_pos_settled[1] > 0):
            raise ValueError("supported record must sit on a height-2 stack")
        if self.supported and not self.touching:
            raise ValueError("supported implies touching")
        # both rotations must be rest orientations of the class
        cls.rest_for_up_offset(self.start_up_offset)
        cls.rest_for_up_offset(self.post_up_offset)

    def with_reward(self, reward: float, cum_reward: float, mean_reward: float) -> "AttemptRecord":
        return replace(
            self, reward=float(reward), cum_reward=float(cum_reward),
            mean_reward=float(mean_reward),
        )


@dataclass
class Episode:
    """Up to MAX_ATTEMPTS consecutive attempts with one theme object."""

    episode_id: int
    theme_class: str
    records: list[AttemptRecord] = field(default_factory=list)
    outcome: str = EXHAUSTED

    def validate(self) -> None:
        if not 1 <= len(self.records) <= MAX_ATTEMPTS:
            raise ValueError(f"episode length {len(self.records)} outside [1, {MAX_ATTEMPTS}]")
        for prev, cur in zip(self.records, self.records[1:]):
            if not np.array_equal(prev.post_rotation, cur.start_rotation):
                raise ValueError("orientation chain broken between attempts")
        if self.outcome not in (STACKED, EXHAUSTED):
            raise ValueError(f"unknown outcome {self.outcome!r}")
