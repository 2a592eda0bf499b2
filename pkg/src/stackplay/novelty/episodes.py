"""Fixed-shape episode tensors for the episode classifier.

Evaluation episodes run one to ten attempts; the classifier wants a
fixed 10-row matrix per episode, so short episodes are padded by
copying their last row. A one-attempt success therefore becomes ten
identical rows, which is itself a strong signature of an easy object.
Each class's episodes are split positionally: the first 90 train the
classifier, the next 10 are its development set, and everything after
that is the pool that detection batches are drawn from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..simworld import Episode, featurize_many, layout_dim

PAD_ROWS = 10
TRAIN_EPISODES = 90
DEV_EPISODES = 10


@dataclass
class PaddedEpisode:
    matrix: np.ndarray  # (PAD_ROWS, c)
    label: str
    episode_id: int

    def validate(self) -> None:
        if self.matrix.ndim != 2 or self.matrix.shape[0] != PAD_ROWS:
            raise ValueError(f"padded matrix must have {PAD_ROWS} rows, got {self.matrix.shape}")


@dataclass
class ClassSplit:
    train: list[PaddedEpisode] = field(default_factory=list)
    dev: list[PaddedEpisode] = field(default_factory=list)
    pool: list[PaddedEpisode] = field(default_factory=list)


def pad_matrix(rows: np.ndarray) -> np.ndarray:
    """Extend a (k, c) matrix to PAD_ROWS rows by copying the last row."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or not 1 <= rows.shape[0] <= PAD_ROWS:
        raise ValueError(f"expected 1..{PAD_ROWS} feature rows, got {rows.shape}")
    if rows.shape[0] == PAD_ROWS:
        return rows.copy()
    tail = np.repeat(rows[-1:], PAD_ROWS - rows.shape[0], axis=0)
    return np.vstack([rows, tail])


def pad_episode(episode: Episode, layout: str) -> PaddedEpisode:
    rows = featurize_many(episode.records, layout)
    return PaddedEpisode(pad_matrix(rows), episode.theme_class, episode.episode_id)


def pad_episodes(episodes: list[Episode], layout: str) -> list[PaddedEpisode]:
    return [pad_episode(ep, layout) for ep in episodes]


def split_class(padded: list[PaddedEpisode], class_name: str) -> ClassSplit:
    need = TRAIN_EPISODES + DEV_EPISODES
    if len(padded) < need:
        raise ValueError(
            f"class {class_name!r} has {len(padded)} episodes, "
            f"needs {need} ({need - len(padded)} short)")
    return ClassSplit(train=list(padded[:TRAIN_EPISODES]),
                      dev=list(padded[TRAIN_EPISODES:need]),
                      pool=list(padded[need:]))


def pad_and_split(episodes_by_class: dict[str, list[Episode]],
                  layout: str) -> dict[str, ClassSplit]:
    """Pad each class's episodes and split train/dev/detection-pool."""
    out = {}
    for name, eps in episodes_by_class.items():
        out[name] = split_class(pad_episodes(eps, layout), name)
    return out


def stack_inputs(padded: list[PaddedEpisode]) -> np.ndarray:
    """(n, 1, PAD_ROWS*c) single-channel sequences for the classifier."""
    if not padded:
        raise ValueError("no episodes to stack")
    flat = np.stack([p.matrix.reshape(-1) for p in padded])
    return flat[:, None, :]


def episode_dim(layout: str) -> int:
    return PAD_ROWS * layout_dim(layout)
