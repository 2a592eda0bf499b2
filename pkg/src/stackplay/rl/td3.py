"""Twin-delayed deterministic policy gradient on the stacking task.

Networks are small dense stacks from the shared layer library; the
actor ends in tanh so its output lives in the normalized placement
square (-1, 1)^2, which maps affinely onto [0, 1000]^2. Critics take
the concatenated (state, action) vector and regress Q. Training is
standard TD3: twin critics with clipped target-policy smoothing,
delayed actor updates, Polyak-averaged targets, uniform-replay Adam
updates, and a uniform-random warmup so the critics see the whole
reward landscape before the actor starts following them.
"""

from __future__ import annotations

import json
import warnings
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..nnet.layers import Dense
from ..nnet.network import Network
from ..nnet.training import Adam
from ..simworld.records import MAX_ATTEMPTS
from .env import StackEnv

POLICY_FORMAT = "stackplay-policy"
POLICY_VERSION = 1

STATE_DIM = 3
ACTION_DIM = 2

ACCURATE = "accurate"
IMPRECISE = "imprecise"


@dataclass
class Td3Config:
    gamma: float = 0.99
    polyak: float = 0.995
    policy_delay: int = 2
    target_noise: float = 0.2
    noise_clip: float = 0.5
    # exploration noise anneals from a tenth of the 1000-unit action
    # span down to a quarter of that, in the actor's normalized
    # coordinates. Wide early noise keeps the noise ball in contact
    # with the success plateau while the actor marches toward it;
    # narrow late noise lets the rolling success clear the accurate
    # bar from anywhere in the plateau interior, where the reward is
    # flat and no gradient compels the actor to sit at dead center.
    expl_noise: float = 0.2
    expl_noise_final: float = 0.05
    expl_anneal_steps: int = 30_000
    # a thin stream of fully random placements keeps the replay buffer
    # anchored to the whole action square; without it the buffer
    # collapses onto the policy's own neighborhood once warmup data is
    # evicted, the critic forgets the reward cliff, and the actor
    # random-walks (observed as stalls at rolling success 0.8-0.88)
    uniform_eps: float = 0.03
    replay_size: int = 50_000
    batch_size: int = 128
    lr: float = 1e-3
    # the actor crawls an order of magnitude slower than the critics so
    # the 100-episode rolling window tracks its true quality; a fast
    # actor would outrun the window and the imprecise checkpoint would
    # already behave like the accurate one
    actor_lr: float = 1e-4
    warmup_steps: int = 2_000
    max_steps: int = 200_000
    hidden: tuple[int, int] = (64, 64)
    success_window: int = 100
    accurate_threshold: float = 0.9
    # a single window over the threshold can be a lucky fluctuation of
    # a weaker policy, and adjacent windows share almost all their
    # samples, so the rate must hold across a full window turnover of
    # fresh episodes before the accurate checkpoint is taken
    accurate_confirm: int = 100
    imprecise_band: tuple[float, float] = (0.5, 0.7)
    imprecise_fallback_frac: float = 0.25
    snapshot_every: int = 500

    def validate(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if not 0.0 < self.polyak < 1.0:
            raise ValueError("polyak must be in (0, 1)")
        lo, hi = self.imprecise_band
        if not 0.0 <= lo < hi <= self.accurate_threshold:
            raise ValueError("imprecise band must sit below the accurate threshold")
        if self.expl_noise_final > self.expl_noise:
            raise ValueError("exploration noise must not anneal upward")

    def noise_at(self, step: int) -> float:
        frac = min(1.0, step / self.expl_anneal_steps)
        return self.expl_noise + frac * (self.expl_noise_final - self.expl_noise)


def _mlp(dims: list[int], out_activation: str, rng: np.random.Generator) -> Network:
    layers = [Dense(a, b, "relu", rng=rng) for a, b in zip(dims[:-2], dims[1:-1])]
    layers.append(Dense(dims[-2], dims[-1], out_activation, rng=rng))
    return Network(layers)


class ReplayBuffer:
    def __init__(self, size: int):
        self.size = int(size)
        self.s = np.zeros((size, STATE_DIM))
        self.a = np.zeros((size, ACTION_DIM))
        self.r = np.zeros(size)
        self.s2 = np.zeros((size, STATE_DIM))
        self.cont = np.zeros(size)  # 0 where the episode ended in a stack
        self.n = 0
        self.ptr = 0

    def add(self, s, a, r, s2, cont):
        i = self.ptr
        self.s[i], self.a[i], self.r[i], self.s2[i], self.cont[i] = s, a, r, s2, cont
        self.ptr = (i + 1) % self.size
        self.n = min(self.n + 1, self.size)

    def sample(self, batch: int, rng: np.random.Generator):
        idx = rng.integers(0, self.n, size=batch)
        return self.s[idx], self.a[idx], self.r[idx], self.s2[idx], self.cont[idx]


def _polyak_into(target: Network, source: Network, polyak: float) -> None:
    for tl, sl in zip(target.layers, source.layers):
        for name, tp in tl.params().items():
            sp = sl.params()[name]
            tp *= polyak
            tp += (1.0 - polyak) * sp


class Td3Agent:
    def __init__(self, cfg: Td3Config, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        h1, h2 = cfg.hidden
        self.actor = _mlp([STATE_DIM, h1, h2, ACTION_DIM], "tanh", rng)
        self.critic1 = _mlp([STATE_DIM + ACTION_DIM, h1, h2, 1], "linear", rng)
        self.critic2 = _mlp([STATE_DIM + ACTION_DIM, h1, h2, 1], "linear", rng)
        # a naive agent must not start at the optimal center placement:
        # both output biases begin decisively off-center (|tanh| > the
        # 0.475 support half-width) so first-attempt success starts
        # near zero, yet within the exploration noise's reach of the
        # plateau; a start the noise ball cannot touch leaves the
        # critic with no slope to estimate and the actor random-walks
        mag = rng.uniform(0.6, 0.9, size=ACTION_DIM)
        sign = np.where(rng.random(ACTION_DIM) < 0.5, -1.0, 1.0)
        self.actor.layers[-1].b = mag * sign
        self.t_actor = self.actor.copy()
        self.t_critic1 = self.critic1.copy()
        self.t_critic2 = self.critic2.copy()
        self.opt_actor = Adam(cfg.actor_lr)
        self.opt_critic1 = Adam(cfg.lr)
        self.opt_critic2 = Adam(cfg.lr)
        self.updates = 0

    def act(self, state_vec: np.ndarray, noise_scale: float = 0.0) -> np.ndarray:
        a = self.actor.logits(state_vec[None, :])[0]
        if noise_scale > 0.0:
            a = a + noise_scale * self.rng.normal(size=ACTION_DIM)
        return np.clip(a, -1.0, 1.0)

    def _critic_step(self, critic: Network, opt: Adam,
                     x: np.ndarray, y: np.ndarray) -> None:
        q = critic.forward(x, train=True)[0].ravel()
        grad = ((2.0 / len(y)) * (q - y))[:, None]
        for i in range(len(critic.layers) - 1, -1, -1):
            grad = critic.layers[i].backward(grad, need_input_grad=i > 0)
        opt.step(critic)

    def update(self, buf: ReplayBuffer) -> None:
        cfg = self.cfg
        s, a, r, s2, cont = buf.sample(cfg.batch_size, self.rng)

        noise = np.clip(self.rng.normal(0.0, cfg.target_noise, size=a.shape),
                        -cfg.noise_clip, cfg.noise_clip)
        a2 = np.clip(self.t_actor.logits(s2) + noise, -1.0, 1.0)
        x2 = np.hstack([s2, a2])
        q_t = np.minimum(self.t_critic1.logits(x2), self.t_critic2.logits(x2)).ravel()
        y = r + cfg.gamma * cont * q_t

        x = np.hstack([s, a])
        self._critic_step(self.critic1, self.opt_critic1, x, y)
        self._critic_step(self.critic2, self.opt_critic2, x, y)

        self.updates += 1
        if self.updates % cfg.policy_delay:
            return

        # deterministic policy gradient: push the actor up critic1's slope
        a_pi = self.actor.forward(s, train=True)[0]
        x_pi = np.hstack([s, a_pi])
        self.critic1.forward(x_pi, train=True)
        grad = np.full((len(s), 1), -1.0 / len(s))
        for i in range(len(self.critic1.layers) - 1, -1, -1):
            grad = self.critic1.layers[i].backward(grad, need_input_grad=True)
        grad = grad[:, STATE_DIM:]
        for i in range(len(self.actor.layers) - 1, -1, -1):
            grad = self.actor.layers[i].backward(grad, need_input_grad=i > 0)
        self.opt_actor.step(self.actor)

        _polyak_into(self.t_actor, self.actor, cfg.polyak)
        _polyak_into(self.t_critic1, self.critic1, cfg.polyak)
        _polyak_into(self.t_critic2, self.critic2, cfg.polyak)

    def state_dict(self, quality: str, step: int, replay_stats: dict) -> dict:
        return {
            "format": POLICY_FORMAT,
            "version": POLICY_VERSION,
            "quality": quality,
            "step": int(step),
            # the noise in effect when this checkpoint was captured;
            # evaluation replays it so the checkpoint behaves as tagged
            "expl_noise": self.cfg.noise_at(step),
            "replay_stats": replay_stats,
            "actor": self.actor.to_dict(),
            "critic1": self.critic1.to_dict(),
            "critic2": self.critic2.to_dict(),
            "target_actor": self.t_actor.to_dict(),
            "target_critic1": self.t_critic1.to_dict(),
            "target_critic2": self.t_critic2.to_dict(),
        }


def checkpoint_actor(ckpt: dict) -> Network:
    if ckpt.get("format") != POLICY_FORMAT:
        raise ValueError("not a policy checkpoint")
    if ckpt.get("version") != POLICY_VERSION:
        raise ValueError(f"unsupported policy checkpoint version {ckpt.get('version')}")
    return Network.from_dict(ckpt["actor"])


def save_policy(path: Path | str, ckpt: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(ckpt, f, indent=1, sort_keys=True)
        f.write("\n")
    return path


def load_policy(path: Path | str) -> dict:
    with open(path, encoding="utf-8") as f:
        ckpt = json.load(f)
    checkpoint_actor(ckpt)  # validates format/version
    return ckpt


@dataclass
class CurvePoint:
    episode: int
    step: int
    episode_reward: float
    rolling_reward: float
    rolling_success: float


@dataclass
class Td3Result:
    accurate: dict
    imprecise: dict
    imprecise_from_fallback: bool
    total_steps: int
    total_episodes: int
    curve: list[CurvePoint] = field(default_factory=list)

    def curve_rows(self) -> list[tuple]:
        return [(p.episode, p.step, p.episode_reward, p.rolling_reward,
                 p.rolling_success) for p in self.curve]


def train_policy(seed: int = 0, cfg: Td3Config | None = None) -> Td3Result:
    """Train until the rolling success rate clears the accurate bar.

    Success is measured on the first attempt of each episode: with ten
    retries allowed, even a uniform-random policy eventually lands a
    block in nine episodes out of ten, so whole-episode success cannot
    tell a trained policy from a lucky one. First-attempt success
    starts near the geometric floor (~0.23) and rises to ~1.0, and
    because a 100-episode rolling mean moves at most 0.01 per episode
    it must pass through the imprecise band on the way up.

    Emits two checkpoints: `accurate` at the first window whose rolling
    success reaches the threshold, and `imprecise` at the first window
    inside the half-trained band, falling back to the snapshot nearest
    25% of the total steps if the band was never visited.
    """
    cfg = cfg or Td3Config()
    cfg.validate()
    rng_agent = np.random.default_rng(np.random.SeedSequence([seed, 0x7D3A]))
    rng_env = np.random.default_rng(np.random.SeedSequence([seed, 0x7D3E]))

    agent = Td3Agent(cfg, rng_agent)
    buf = ReplayBuffer(cfg.replay_size)
    env = StackEnv("cube", rng_env)

    def stats() -> dict:
        filled = buf.r[: buf.n]
        return {"transitions": int(buf.n),
                "mean_reward": float(filled.mean()) if buf.n else 0.0}

    outcomes: deque[float] = deque(maxlen=cfg.success_window)
    rewards: deque[float] = deque(maxlen=cfg.success_window)
    curve: list[CurvePoint] = []
    snapshots: list[tuple[int, dict]] = []
    accurate = None
    imprecise = None

    state = env.reset(episode_id=0)
    ep_reward = 0.0
    ep_first_step = 1
    episode = 0
    warmup_episodes = 0
    above = 0
    step = 0
    while step < cfg.max_steps:
        step += 1
        if step <= cfg.warmup_steps or rng_agent.random() < cfg.uniform_eps:
            a = rng_agent.uniform(-1.0, 1.0, size=ACTION_DIM)
        else:
            a = agent.act(state.vector(), cfg.noise_at(step))
        rec, r, next_state, done = env.step(a)
        stacked = bool(rec.supported)
        # credit stays within the attempt: the state carries no attempt
        # memory, so bootstrapping across retries of an identical state
        # values a failed placement at nearly the successful one (the
        # retry self-loop makes failure almost free) and flattens the
        # action-value cliff the actor needs to climb
        buf.add(state.vector(), a, r, next_state.vector(), 0.0)
        state = next_state
        ep_reward += r

        if step > cfg.warmup_steps:
            agent.update(buf)
        if imprecise is None and (step == 1 or step % cfg.snapshot_every == 0):
            snapshots.append((step, agent.state_dict(IMPRECISE, step, stats())))

        if not done:
            continue

        # episodes begun under the uniform warmup say nothing about the
        # policy; the rolling window and the curve only count episodes
        # the actor played from the first attempt
        if ep_first_step <= cfg.warmup_steps:
            warmup_episodes += 1
        else:
            episode += 1
            outcomes.append(1.0 if env.records[0].supported else 0.0)
            rewards.append(ep_reward)
            rate = float(np.mean(outcomes))
            curve.append(CurvePoint(episode, step, ep_reward,
                                    float(np.mean(rewards)), rate))
            if len(outcomes) == cfg.success_window:
                lo, hi = cfg.imprecise_band
                if imprecise is None and lo <= rate <= hi:
                    imprecise = agent.state_dict(IMPRECISE, step, stats())
                    snapshots.clear()
                above = above + 1 if rate >= cfg.accurate_threshold else 0
                if above >= cfg.accurate_confirm:
                    accurate = agent.state_dict(ACCURATE, step, stats())
                    break
        state = env.reset()
        ep_reward = 0.0
        ep_first_step = step + 1

    if accurate is None:
        raise RuntimeError(
            f"rolling success never reached {cfg.accurate_threshold} "
            f"within {cfg.max_steps} steps")

    fallback = imprecise is None
    if fallback:
        want = cfg.imprecise_fallback_frac * step
        warnings.warn(
            "rolling success never entered the imprecise band "
            f"{cfg.imprecise_band}; falling back to the snapshot nearest "
            f"{cfg.imprecise_fallback_frac:.0%} of {step} steps")
        _, imprecise = min(snapshots, key=lambda sn: abs(sn[0] - want))

    return Td3Result(accurate=accurate, imprecise=imprecise,
                     imprecise_from_fallback=fallback, total_steps=step,
                     total_episodes=episode + warmup_episodes, curve=curve)
