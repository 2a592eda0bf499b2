"""Frozen-policy rollouts over the evaluation object set.

Every object is stacked as if it were a cube: the actor only ever sees
the cube-shaped state vector, whatever lands on the stack. Episodes are
replayed from per-episode random streams, so a (checkpoint, seed) pair
always reproduces the same dataset and any episode can be regenerated
in isolation. The actor is frozen; the checkpoint's recorded
exploration noise is replayed so the policy behaves exactly as it did
when its quality tag was earned.
"""

from __future__ import annotations

import numpy as np

from ..nnet.network import Network
from ..simworld.episodes import episode_rng
from ..simworld.records import EXHAUSTED, STACKED, Episode
from .env import StackEnv
from .td3 import checkpoint_actor

EVAL_CLASSES = ("cube", "sphere", "cylinder", "capsule", "small_cube")
EVAL_TIMESTEPS = 1_000


def evaluate_policy(checkpoint: dict | Network, theme_class: str,
                    timesteps: int = EVAL_TIMESTEPS, seed: int = 0,
                    noise: float | None = None) -> list[Episode]:
    """Roll the policy for a fixed attempt budget; returns full episodes.

    The budget counts attempts, not episodes: the final episode may be
    truncated mid-run when the budget expires. `noise` overrides the
    checkpoint's stored exploration noise (0 gives the bare actor).
    """
    if isinstance(checkpoint, Network):
        actor = checkpoint
        sigma = 0.0 if noise is None else float(noise)
    else:
        actor = checkpoint_actor(checkpoint)
        sigma = float(checkpoint.get("expl_noise", 0.0)) if noise is None else float(noise)
    if timesteps < 1:
        raise ValueError("timesteps must be positive")

    episodes: list[Episode] = []
    steps = 0
    ep_id = 0
    while steps < timesteps:
        rng = episode_rng(seed, theme_class, ep_id)
        env = StackEnv(theme_class, rng)
        state = env.reset(episode_id=ep_id)
        done = False
        stacked = False
        while not done and steps < timesteps:
            a = actor.logits(state.vector()[None, :])[0]
            if sigma > 0.0:
                a = np.clip(a + sigma * rng.normal(size=a.shape), -1.0, 1.0)
            rec, _, state, done = env.step(a)
            stacked = stacked or bool(rec.supported)
            steps += 1
        ep = Episode(ep_id, theme_class, list(env.records),
                     STACKED if stacked else EXHAUSTED)
        ep.validate()
        episodes.append(ep)
        ep_id += 1
    return episodes


def evaluate_all(checkpoint: dict | Network, classes=EVAL_CLASSES,
                 timesteps: int = EVAL_TIMESTEPS, seed: int = 0,
                 noise: float | None = None) -> dict[str, list[Episode]]:
    return {c: evaluate_policy(checkpoint, c, timesteps, seed, noise)
            for c in classes}


def episode_rewards(episodes: list[Episode]) -> np.ndarray:
    """Total reward collected in each episode."""
    return np.array([sum(r.reward for r in ep.records) for ep in episodes])


def mean_episode_reward(episodes: list[Episode]) -> float:
    return float(episode_rewards(episodes).mean())


def count_stacked(episodes: list[Episode]) -> int:
    return sum(1 for ep in episodes if ep.outcome == STACKED)
