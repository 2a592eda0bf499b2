"""Analytic desk-scale stacking world."""

from .dataio import read_episodes, read_records, write_episodes, write_records
from .episodes import episode_rng, generate_freeplay, sample_action, sample_episode
from .features import (LAYOUTS, decode, featurize, featurize_many,
                       layout_dim, layout_stats)
from .geometry import up_offset_of, wrap_angle
from .objects import CATALOG, CLASS_NAMES, FLAT, ROUND, get_class, label_contact
from .physics import apply_jitter, place_and_settle, sample_start_pose
from .records import AttemptRecord, Episode, PlacementAction, Pose

__all__ = [
    "AttemptRecord", "CATALOG", "CLASS_NAMES", "Episode", "FLAT", "LAYOUTS",
    "PlacementAction", "Pose", "ROUND", "apply_jitter", "decode", "episode_rng",
    "featurize", "featurize_many", "generate_freeplay", "get_class",
    "layout_stats",
    "label_contact", "layout_dim", "place_and_settle", "read_episodes",
    "read_records", "sample_action", "sample_episode", "sample_start_pose",
    "up_offset_of", "wrap_angle", "write_episodes", "write_records",
]
