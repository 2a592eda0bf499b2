"""The nine object classes and their settling behavior tables.

Each class is described geometrically: half extents, the axis of
rotational symmetry (if any), and the discrete set of rest orientations
the analytic settling model allows. A rest orientation carries the
flat/round nature of the contact it makes, the height of the object's
center when resting on a surface in that orientation, and the parameters
of what happens when the object fails to stay on the stack (how likely it
is to roll given a round contact, what orientation it lands in, how far
it travels).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import wrap_angle

CLASS_NAMES = [
    "cube",
    "sphere",
    "cylinder",
    "capsule",
    "egg",
    "rect_prism",
    "cone",
    "pyramid",
    "small_cube",
]

FLAT = "flat"
ROUND = "round"

# Side-rest tilt of the cone.
CONE_SIDE_TILT = float(2.0 * np.pi / 3.0)
# The pyramid is the cone's angular sibling: same height, same lateral
# tilt when tipped, so upright landings of the two are indistinguishable
# record-by-record.  They part ways once tipped: a pyramid settles on a
# flat triangular face while a cone keeps rolling about its apex.
PYRAMID_SIDE_TILT = CONE_SIDE_TILT
PYRAMID_HALF_HEIGHT = 0.6


@dataclass(frozen=True)
class RestOrientation:
    """One settled-pose category of an object class."""

    label: str
    up_offset: float            # radians between world +Y and local +Y
    contact: str                # FLAT or ROUND
    rest_height: float          # center height above the support surface
    footprint: tuple[float, float] | None  # contact patch half extents (flat only)
    roll_probability: float     # chance a round contact rolls off under jitter
    fall_reach: tuple[float, float]  # extra travel (world units) when falling off
    # (next orientation label, probability) after a fall
    transitions: tuple[tuple[str, float], ...]

    def tilts(self) -> list[float]:
        """Realizable tilt angles whose folded value equals up_offset."""
        u = self.up_offset
        if abs(u) < 1e-12 or abs(u - np.pi) < 1e-12:
            return [u]
        return [u, float(wrap_angle(-u))]


@dataclass(frozen=True)
class ObjectClass:
    """Geometric description of one theme-object type."""

    name: str
    half_extents: np.ndarray
    sym_axis: str | None        # "X", "Y", or None
    rests: tuple[RestOrientation, ...] = field(default_factory=tuple)

    def rest(self, label: str) -> RestOrientation:
        for r in self.rests:
            if r.label == label:
                return r
        raise KeyError(f"{self.name} has no rest orientation {label!r}")

    def rest_for_up_offset(self, up_offset: float, tol: float = 1e-6) -> RestOrientation:
        """The rest orientation matching an up offset, within tolerance."""
        for r in self.rests:
            if abs(up_offset - r.up_offset) <= tol:
                return r
        raise ValueError(
            f"up offset {up_offset:.6f} rad is not a rest orientation of {self.name}"
        )

    def local_sym_axis(self) -> np.ndarray | None:
        if self.sym_axis == "X":
            return np.array([1.0, 0.0, 0.0])
        if self.sym_axis == "Y":
            return np.array([0.0, 1.0, 0.0])
        return None


def _box(name, he, sym, reach=(0.55, 0.95)):
    # Boxy objects land flat and slide a short distance.
    upright = RestOrientation(
        "upright", 0.0, FLAT, he[1], (he[0], he[2]),
        roll_probability=0.0, fall_reach=reach, transitions=(("upright", 1.0),),
    )
    return ObjectClass(name, np.asarray(he, dtype=float), sym, (upright,))


def _build_catalog() -> dict[str, ObjectClass]:
    cat = {}
    cat["cube"] = _box("cube", (0.5, 0.5, 0.5), None)
    cat["small_cube"] = _box("small_cube", (0.25, 0.25, 0.25), None, reach=(0.45, 0.8))
    # longer body pivots over the edge and travels further than a cube
    cat["rect_prism"] = _box("rect_prism", (0.75, 0.5, 0.5), "X", reach=(0.7, 1.1))

    cat["sphere"] = ObjectClass(
        "sphere", np.array([0.5, 0.5, 0.5]), None,
        (RestOrientation(
            "resting", 0.0, ROUND, 0.5, None,
            roll_probability=1.0, fall_reach=(1.7, 2.6),
            transitions=(("resting", 1.0),),
        ),),
    )
    cat["egg"] = ObjectClass(
        "egg", np.array([0.75, 0.5, 0.5]), "X",
        (RestOrientation(
            "side", 0.0, ROUND, 0.5, None,
            roll_probability=1.0, fall_reach=(1.2, 2.0),
            transitions=(("side", 1.0),),
        ),),
    )

    # tall cylinder: stands higher than a cube, lies at drum radius
    cat["cylinder"] = ObjectClass(
        "cylinder", np.array([0.5, 0.75, 0.5]), "Y",
        (
            RestOrientation(
                "upright", 0.0, FLAT, 0.75, (0.5, 0.5),
                roll_probability=0.0, fall_reach=(0.7, 1.2),
                transitions=(("horizontal", 0.8), ("upright", 0.2)),
            ),
            RestOrientation(
                "inverted", float(np.pi), FLAT, 0.75, (0.5, 0.5),
                roll_probability=0.0, fall_reach=(0.7, 1.2),
                transitions=(("horizontal", 0.8), ("inverted", 0.2)),
            ),
            RestOrientation(
                "horizontal", float(np.pi / 2), ROUND, 0.5, None,
                roll_probability=0.9, fall_reach=(1.1, 1.7),
                transitions=(("horizontal", 1.0),),
            ),
        ),
    )
    # thin pill: same length as the cylinder but half the radius
    cat["capsule"] = ObjectClass(
        "capsule", np.array([0.25, 0.75, 0.25]), "Y",
        (
            RestOrientation(
                "upright", 0.0, ROUND, 0.75, None,
                roll_probability=0.98, fall_reach=(1.6, 2.4),
                transitions=(("horizontal", 0.9), ("upright", 0.1)),
            ),
            RestOrientation(
                "inverted", float(np.pi), ROUND, 0.75, None,
                roll_probability=0.98, fall_reach=(1.6, 2.4),
                transitions=(("horizontal", 0.9), ("inverted", 0.1)),
            ),
            RestOrientation(
                "horizontal", float(np.pi / 2), ROUND, 0.25, None,
                roll_probability=0.85, fall_reach=(1.6, 2.4),
                transitions=(("horizontal", 1.0),),
            ),
        ),
    )

    # taller than it is wide, like a party hat
    cat["cone"] = ObjectClass(
        "cone", np.array([0.5, 0.6, 0.5]), "Y",
        (
            RestOrientation(
                "base", 0.0, FLAT, 0.6, (0.5, 0.5),
                roll_probability=0.0, fall_reach=(0.55, 0.95),
                transitions=(("side", 0.75), ("base", 0.25)),
            ),
            # Cones pivot around the apex and come to rest nearby.
            RestOrientation(
                "side", CONE_SIDE_TILT, ROUND, 0.42, None,
                roll_probability=0.7, fall_reach=(0.75, 1.25),
                transitions=(("side", 0.9), ("base", 0.1)),
            ),
        ),
    )
    cat["pyramid"] = ObjectClass(
        "pyramid", np.array([0.5, PYRAMID_HALF_HEIGHT, 0.5]), "Y",
        (
            RestOrientation(
                "base", 0.0, FLAT, PYRAMID_HALF_HEIGHT, (0.5, 0.5),
                roll_probability=0.0, fall_reach=(0.55, 0.95),
                transitions=(("side", 0.75), ("base", 0.25)),
            ),
            # tips over onto a face; lands much like a fallen cone
            RestOrientation(
                "side", PYRAMID_SIDE_TILT, FLAT, 0.32, (0.5, 0.33),
                roll_probability=0.0, fall_reach=(0.55, 0.95),
                transitions=(("side", 0.9), ("base", 0.1)),
            ),
        ),
    )
    return cat


CATALOG: dict[str, ObjectClass] = _build_catalog()


def get_class(name: str) -> ObjectClass:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown object class {name!r}; known: {CLASS_NAMES}") from None


def label_contact(cls: ObjectClass | str, post_rotation: np.ndarray) -> str:
    """FLAT or ROUND for the side an object came to rest on.

    The settled rotation determines the contact deterministically; a
    rotation that is not a rest orientation of the class is rejected.
    """
    from .geometry import up_offset_of

    if isinstance(cls, str):
        cls = get_class(cls)
    return cls.rest_for_up_offset(up_offset_of(np.asarray(post_rotation, dtype=float))).contact
