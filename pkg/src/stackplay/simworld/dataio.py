"""Dataset files: CSV of attempt records plus a JSON sidecar manifest.

Files are byte-deterministic: UTF-8, LF line endings, floats written
with repr() (shortest round-trip form), manifest keys sorted.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from pathlib import Path

import numpy as np

from .records import EXHAUSTED, STACKED, AttemptRecord, Episode

LAYOUT_VERSION = 1

COLUMNS = [
    "episode_id", "attempt_idx", "theme_class",
    "start_rot_x", "start_rot_y", "start_rot_z", "start_up_offset",
    "action_x", "action_z",
    "post_rot_x", "post_rot_y", "post_rot_z", "post_up_offset",
    "jitter_x", "jitter_y", "jitter_z",
    "rel_before_x", "rel_before_y", "rel_before_z",
    "rel_after_x", "rel_after_y", "rel_after_z",
    "rel_settled_x", "rel_settled_y", "rel_settled_z",
    "supported", "touching",
    "reward", "cum_reward", "mean_reward", "stack_height",
]


def _row(rec: AttemptRecord) -> list[str]:
    floats = [
        *rec.start_rotation, rec.start_up_offset, *rec.action,
        *rec.post_rotation, rec.post_up_offset, *rec.jitter,
        *rec.rel_pos_before, *rec.rel_pos_after, *rec.rel_pos_settled,
    ]
    return (
        [str(rec.episode_id), str(rec.attempt_idx), rec.theme_class]
        + [repr(float(x)) for x in floats]
        + [str(int(rec.supported)), str(int(rec.touching))]
        + [repr(float(rec.reward)), repr(float(rec.cum_reward)),
           repr(float(rec.mean_reward)), str(int(rec.stack_height))]
    )


def manifest_path(csv_path: Path | str) -> Path:
    p = Path(csv_path)
    return p.with_suffix(p.suffix + ".manifest.json")


def write_records(path: Path | str, records: list[AttemptRecord],
                  seed: int | None = None, extra: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(COLUMNS)
        for rec in records:
            w.writerow(_row(rec))
    manifest = {
        "layout_version": LAYOUT_VERSION,
        "n_records": len(records),
        "class_counts": dict(sorted(Counter(r.theme_class for r in records).items())),
        "seed": seed,
    }
    if extra:
        manifest.update(extra)
    with open(manifest_path(path), "w", encoding="utf-8", newline="") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_episodes(path: Path | str, episodes: list[Episode],
                   seed: int | None = None, extra: dict | None = None) -> Path:
    records = [r for ep in episodes for r in ep.records]
    return write_records(path, records, seed=seed, extra=extra)


def read_records(path: Path | str) -> list[AttemptRecord]:
    out = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != COLUMNS:
            raise ValueError(f"unexpected columns in {path}")
        for row in reader:
            g = dict(zip(COLUMNS, row))
            out.append(AttemptRecord(
                theme_class=g["theme_class"],
                start_rotation=np.array([float(g["start_rot_x"]), float(g["start_rot_y"]),
                                         float(g["start_rot_z"])]),
                start_up_offset=float(g["start_up_offset"]),
                action=np.array([float(g["action_x"]), float(g["action_z"])]),
                post_rotation=np.array([float(g["post_rot_x"]), float(g["post_rot_y"]),
                                        float(g["post_rot_z"])]),
                post_up_offset=float(g["post_up_offset"]),
                jitter=np.array([float(g["jitter_x"]), float(g["jitter_y"]),
                                 float(g["jitter_z"])]),
                rel_pos_before=np.array([float(g["rel_before_x"]), float(g["rel_before_y"]),
                                         float(g["rel_before_z"])]),
                rel_pos_after=np.array([float(g["rel_after_x"]), float(g["rel_after_y"]),
                                        float(g["rel_after_z"])]),
                rel_pos_settled=np.array([float(g["rel_settled_x"]), float(g["rel_settled_y"]),
                                          float(g["rel_settled_z"])]),
                supported=bool(int(g["supported"])),
                touching=bool(int(g["touching"])),
                reward=float(g["reward"]),
                cum_reward=float(g["cum_reward"]),
                mean_reward=float(g["mean_reward"]),
                stack_height=int(g["stack_height"]),
                episode_id=int(g["episode_id"]),
                attempt_idx=int(g["attempt_idx"]),
            ))
    return out


def read_episodes(path: Path | str) -> list[Episode]:
    episodes: dict[tuple[str, int], Episode] = {}
    for rec in read_records(path):
        key = (rec.theme_class, rec.episode_id)
        if key not in episodes:
            episodes[key] = Episode(episode_id=rec.episode_id, theme_class=rec.theme_class)
        episodes[key].records.append(rec)
    for ep in episodes.values():
        ep.records.sort(key=lambda r: r.attempt_idx)
        ep.outcome = STACKED if any(r.supported for r in ep.records) else EXHAUSTED
    return list(episodes.values())
