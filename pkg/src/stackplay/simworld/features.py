"""Fixed feature layouts turning attempt records into numeric vectors.

Three layouts exist: the 24-dim free-play layout used by the behavior
classifiers, the 19-dim per-timestep layout logged during policy
evaluation, and its 16-dim variant with the jitter vector ablated.
Layouts are bijections on the fields they include, so decode() recovers
those fields exactly.
"""

from __future__ import annotations

import numpy as np

from .records import AttemptRecord

# field name -> how many scalars it contributes
_FIELD_DIMS = {
    "start_rotation": 3,
    "start_up_offset": 1,
    "action": 2,
    "post_rotation": 3,
    "post_up_offset": 1,
    "jitter": 3,
    "rel_pos_before": 3,
    "rel_pos_after": 3,
    "rel_pos_settled": 3,
    "relations": 2,
    "reward": 1,
    "stack_height": 1,
    "supported": 1,
}

LAYOUTS: dict[str, tuple[str, ...]] = {
    "freeplay": (
        "start_rotation", "start_up_offset", "action", "post_rotation",
        "post_up_offset", "jitter", "rel_pos_before", "rel_pos_after",
        "rel_pos_settled", "relations",
    ),
    "rl19": (
        "action", "start_up_offset", "post_up_offset", "post_rotation",
        "jitter", "rel_pos_after", "rel_pos_settled", "reward",
        "stack_height", "supported",
    ),
    "rl16_nojitter": (
        "action", "start_up_offset", "post_up_offset", "post_rotation",
        "rel_pos_after", "rel_pos_settled", "reward", "stack_height",
        "supported",
    ),
}


# Reference location/scale of each free-play dimension, measured over a
# large mixed-class sample. Models fold these into their input layer so
# optimization sees comparably scaled dimensions; feature vectors
# themselves stay in raw record units.
FREEPLAY_LOC = np.array([
    2.168, 3.159, 2.156, 0.722, 0.002, -0.002, 2.199, 3.158, 2.195, 0.739,
    -0.001, -0.005, -0.001, 0.004, 2.871, -0.004, 0.004, 1.769, -0.004,
    0.007, 0.095, -0.02, 0.118, 0.949,
])
FREEPLAY_SCALE = np.array([
    1.821, 2.5, 1.817, 0.926, 0.583, 0.577, 1.826, 2.51, 1.825, 0.911,
    0.6, 0.529, 0.6, 1.166, 0.216, 1.153, 1.166, 0.552, 1.153, 2.5,
    0.673, 2.464, 0.322, 0.221,
])


# Same idea for the policy-evaluation layouts, measured over the pooled
# five-class evaluation rows of a trained accurate policy. The no-jitter
# variant reuses the same constants minus the jitter triple.
RL19_LOC = np.array([
    -0.2, 0.236, 0.63, 0.628, 2.128, 3.138, 2.146, -0.011, 0.009, -0.001,
    -0.401, 1.844, 0.471, -1.589, 0.715, 1.872, 433.461, 1.447, 0.447,
])
RL19_SCALE = np.array([
    0.145, 0.145, 0.869, 0.832, 1.792, 2.518, 1.794, 0.64, 0.409, 0.65,
    0.291, 0.293, 0.29, 1.767, 1.024, 1.824, 480.671, 0.497, 0.497,
])

_RL19_JITTER_DIMS = slice(7, 10)


def layout_stats(layout: str) -> tuple[np.ndarray, np.ndarray]:
    """(location, scale) conditioning constants for a layout's dimensions."""
    if layout == "freeplay":
        return FREEPLAY_LOC.copy(), FREEPLAY_SCALE.copy()
    if layout == "rl19":
        return RL19_LOC.copy(), RL19_SCALE.copy()
    if layout == "rl16_nojitter":
        keep = np.ones(RL19_LOC.shape[0], dtype=bool)
        keep[_RL19_JITTER_DIMS] = False
        return RL19_LOC[keep], RL19_SCALE[keep]
    raise KeyError(f"no conditioning constants for layout {layout!r}")


def layout_dim(layout: str) -> int:
    fields = _fields(layout)
    return sum(_FIELD_DIMS[f] for f in fields)


def _fields(layout: str) -> tuple[str, ...]:
    try:
        return LAYOUTS[layout]
    except KeyError:
        raise ValueError(f"unknown layout {layout!r}; known: {sorted(LAYOUTS)}") from None


def _field_values(rec: AttemptRecord, name: str) -> np.ndarray:
    if name == "relations":
        return np.array([float(rec.supported), float(rec.touching)])
    if name == "supported":
        return np.array([float(rec.supported)])
    if name == "stack_height":
        return np.array([float(rec.stack_height)])
    v = getattr(rec, name)
    return np.atleast_1d(np.asarray(v, dtype=float))


def featurize(rec: AttemptRecord, layout: str) -> np.ndarray:
    return np.concatenate([_field_values(rec, f) for f in _fields(layout)])


def featurize_many(records, layout: str) -> np.ndarray:
    rows = [featurize(r, layout) for r in records]
    return np.stack(rows) if rows else np.empty((0, layout_dim(layout)))


def decode(vec: np.ndarray, layout: str) -> dict[str, np.ndarray | float]:
    """Inverse of featurize over the included fields."""
    vec = np.asarray(vec, dtype=float).reshape(-1)
    if vec.shape[0] != layout_dim(layout):
        raise ValueError(f"vector length {vec.shape[0]} != {layout_dim(layout)} for {layout!r}")
    out: dict[str, np.ndarray | float] = {}
    i = 0
    for f in _fields(layout):
        d = _FIELD_DIMS[f]
        chunk = vec[i:i + d]
        out[f] = float(chunk[0]) if d == 1 else chunk.copy()
        i += d
    return out
