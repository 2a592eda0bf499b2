"""Episode generation for free play.

Each episode owns an independent RNG stream derived from
(root seed, class index, episode index), so any subset of episodes can
be generated in any order, serially or across processes, with identical
results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .objects import CLASS_NAMES, get_class
from .physics import place_and_settle, sample_start_pose
from .records import EXHAUSTED, MAX_ATTEMPTS, STACKED, Episode, PlacementAction, Pose

ACTION_EDGE = 1.0 - 1e-12  # keep uniform draws strictly inside the open square


def sample_action(rng: np.random.Generator) -> PlacementAction:
    coord = np.clip(rng.uniform(-1.0, 1.0, size=2), -ACTION_EDGE, ACTION_EDGE)
    return PlacementAction(coord)


def episode_rng(seed: int, class_name: str, episode_id: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), CLASS_NAMES.index(class_name), int(episode_id)])
    return np.random.Generator(np.random.PCG64(ss))


def sample_episode(class_name: str, rng: np.random.Generator, episode_id: int = 0,
                   n_attempts: int = MAX_ATTEMPTS, stop_on_success: bool = False) -> Episode:
    """Run up to n_attempts placements, carrying orientation between them."""
    cls = get_class(class_name)
    pose = sample_start_pose(cls, rng)
    ep = Episode(episode_id=episode_id, theme_class=class_name)
    for k in range(n_attempts):
        rec = place_and_settle(cls, pose, sample_action(rng), rng)
        rec.episode_id = episode_id
        rec.attempt_idx = k
        ep.records.append(rec)
        if rec.supported:
            ep.outcome = STACKED
            if stop_on_success:
                break
        pose = Pose.from_rotation(rec.post_rotation)
    if not any(r.supported for r in ep.records):
        ep.outcome = EXHAUSTED
    return ep


def _gen_one(args) -> Episode:
    class_name, episode_id, seed, n_attempts = args
    rng = episode_rng(seed, class_name, episode_id)
    return sample_episode(class_name, rng, episode_id, n_attempts)


def generate_freeplay(class_name: str, n_records: int, seed: int,
                      jobs: int = 1) -> list[Episode]:
    """Exactly n_records attempts for one class; byte-identical per seed."""
    if n_records <= 0:
        raise ValueError("n_records must be positive")
    get_class(class_name)  # validates the name
    n_full, rem = divmod(n_records, MAX_ATTEMPTS)
    tasks = [(class_name, i, seed, MAX_ATTEMPTS) for i in range(n_full)]
    if rem:
        tasks.append((class_name, n_full, seed, rem))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            episodes = list(pool.map(_gen_one, tasks, chunksize=64))
    else:
        episodes = [_gen_one(t) for t in tasks]
    episodes.sort(key=lambda e: e.episode_id)
    return episodes


def flatten(episodes: list[Episode]):
    for ep in episodes:
        yield from ep.records
