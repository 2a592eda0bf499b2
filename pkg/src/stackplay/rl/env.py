"""Cube-stacking environment for the placement policy.

One step is one placement attempt. An episode allows up to
MAX_ATTEMPTS attempts and ends early on a successful stack. The
policy-facing action space is [0, 1000]^2 with the optimum at
(500, 500), mapped affinely onto the placement square (-1, 1)^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..simworld.episodes import ACTION_EDGE
from ..simworld.objects import ObjectClass, get_class
from ..simworld.physics import place_and_settle, sample_start_pose
from ..simworld.records import MAX_ATTEMPTS, AttemptRecord, PlacementAction, Pose

RL_ACTION_LOW = 0.0
RL_ACTION_HIGH = 1000.0
RL_OPTIMAL = np.array([500.0, 500.0])

MISS = "miss"
TOUCH = "touch"
SUCCESS = "success"
OUTCOMES = (MISS, TOUCH, SUCCESS)

SUCCESS_BASE = 1000.0
SUCCESS_STEP_PENALTY = 100.0
TOUCH_REWARD = 9.0
MISS_REWARD = -1.0


@dataclass
class RlState:
    """What the policy sees: blocks in the stack and its center of gravity."""

    stack_count: int
    cog_xz: np.ndarray

    def __post_init__(self):
        self.cog_xz = np.asarray(self.cog_xz, dtype=float).reshape(2)
        self.validate()

    def validate(self) -> None:
        if self.stack_count not in (1, 2):
            raise ValueError(f"stack_count must be 1 or 2, got {self.stack_count}")
        if not np.all(np.isfinite(self.cog_xz)):
            raise ValueError("cog_xz must be finite")

    def vector(self) -> np.ndarray:
        """Network input: (stack_count - 1, cog_x, cog_z)."""
        return np.array([self.stack_count - 1.0, *self.cog_xz])


def clamp_rl_action(action) -> np.ndarray:
    a = np.asarray(action, dtype=float)
    return np.clip(a, RL_ACTION_LOW, RL_ACTION_HIGH)


def rl_to_norm(action) -> np.ndarray:
    """[0, 1000] -> the open placement interval (-1, 1), elementwise."""
    a = clamp_rl_action(action)
    return np.clip(a / 500.0 - 1.0, -ACTION_EDGE, ACTION_EDGE)


def norm_to_rl(a_norm) -> np.ndarray:
    a = np.asarray(a_norm, dtype=float)
    return 500.0 * (a + 1.0)


def placement_from_norm(a_norm) -> PlacementAction:
    a = np.asarray(a_norm, dtype=float).reshape(2)
    return PlacementAction(np.clip(a, -ACTION_EDGE, ACTION_EDGE))


def outcome_of(rec: AttemptRecord) -> str:
    if rec.supported:
        return SUCCESS
    return TOUCH if rec.touching else MISS


def reward(outcome: str, attempt_idx: int) -> float:
    """Reward for one attempt; attempt_idx counts from 1."""
    if not 1 <= attempt_idx <= MAX_ATTEMPTS:
        raise ValueError(f"attempt_idx {attempt_idx} outside [1, {MAX_ATTEMPTS}]")
    if outcome == SUCCESS:
        return SUCCESS_BASE - SUCCESS_STEP_PENALTY * (attempt_idx - 1)
    if outcome == TOUCH:
        return TOUCH_REWARD
    if outcome == MISS:
        return MISS_REWARD
    raise ValueError(f"unknown outcome {outcome!r}")


class StackEnv:
    """Places a theme object on a destination cube, one attempt per step."""

    def __init__(self, theme: str = "cube", rng: np.random.Generator | None = None):
        self.cls: ObjectClass = get_class(theme)
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.episode_id = -1
        self.pose: Pose | None = None
        self.attempt = 0
        self.cum_reward = 0.0
        self.records: list[AttemptRecord] = []

    def reset(self, episode_id: int | None = None,
              rng: np.random.Generator | None = None) -> RlState:
        if rng is not None:
            self.rng = rng
        self.episode_id = self.episode_id + 1 if episode_id is None else int(episode_id)
        self.pose = sample_start_pose(self.cls, self.rng)
        self.attempt = 0
        self.cum_reward = 0.0
        self.records = []
        return RlState(1, np.zeros(2))

    def step(self, a_norm) -> tuple[AttemptRecord, float, RlState, bool]:
        """Returns (record, reward, next state, episode done)."""
        if self.pose is None:
            raise RuntimeError("call reset() before step()")
        if self.attempt >= MAX_ATTEMPTS:
            raise RuntimeError("episode exhausted; call reset()")
        self.attempt += 1
        rec = place_and_settle(self.cls, self.pose, placement_from_norm(a_norm), self.rng)
        r = reward(outcome_of(rec), self.attempt)
        self.cum_reward += r
        rec = rec.with_reward(r, self.cum_reward, self.cum_reward / self.attempt)
        rec.episode_id = self.episode_id
        rec.attempt_idx = self.attempt - 1
        self.records.append(rec)
        done = rec.supported or self.attempt >= MAX_ATTEMPTS
        if rec.supported:
            # theme joined the stack: its lateral offset shifts the
            # two-block center of gravity to half that offset
            state = RlState(2, rec.rel_pos_settled[[0, 2]] / 2.0)
        else:
            state = RlState(1, np.zeros(2))
        self.pose = Pose.from_rotation(rec.post_rotation)
        return rec, r, state, done
