"""Placement policy: environment, TD3 training, frozen evaluation."""

from .env import (
    MISS,
    OUTCOMES,
    RL_ACTION_HIGH,
    RL_ACTION_LOW,
    RL_OPTIMAL,
    SUCCESS,
    TOUCH,
    RlState,
    StackEnv,
    clamp_rl_action,
    norm_to_rl,
    outcome_of,
    placement_from_norm,
    reward,
    rl_to_norm,
)
from .evaluate import (
    EVAL_CLASSES,
    EVAL_TIMESTEPS,
    count_stacked,
    episode_rewards,
    evaluate_all,
    evaluate_policy,
    mean_episode_reward,
)
from .td3 import (
    ACCURATE,
    IMPRECISE,
    CurvePoint,
    ReplayBuffer,
    Td3Agent,
    Td3Config,
    Td3Result,
    checkpoint_actor,
    load_policy,
    save_policy,
    train_policy,
)

__all__ = [
    "ACCURATE",
    "EVAL_CLASSES",
    "EVAL_TIMESTEPS",
    "IMPRECISE",
    "MISS",
    "OUTCOMES",
    "RL_ACTION_HIGH",
    "RL_ACTION_LOW",
    "RL_OPTIMAL",
    "SUCCESS",
    "TOUCH",
    "CurvePoint",
    "ReplayBuffer",
    "RlState",
    "StackEnv",
    "Td3Agent",
    "Td3Config",
    "Td3Result",
    "checkpoint_actor",
    "clamp_rl_action",
    "count_stacked",
    "episode_rewards",
    "evaluate_all",
    "evaluate_policy",
    "load_policy",
    "mean_episode_reward",
    "norm_to_rl",
    "outcome_of",
    "placement_from_norm",
    "reward",
    "rl_to_norm",
    "save_policy",
    "train_policy",
]
