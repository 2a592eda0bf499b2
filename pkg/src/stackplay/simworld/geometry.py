"""Rotation helpers shared by the stacking simulator.

Euler angles are intrinsic XYZ (apply ``R = Rx @ Ry @ Rz`` to column
vectors), in radians, wrapped to [0, 2*pi). The "up offset" of a pose is
the angle between the world +Y axis and the object's local +Y axis,
always in [0, pi].
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi

WORLD_UP = np.array([0.0, 1.0, 0.0])


def wrap_angle(theta):
    """Wrap an angle (scalar or array) into [0, 2*pi)."""
    return np.mod(theta, TWO_PI)


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_to_matrix(euler: np.ndarray) -> np.ndarray:
    """Rotation matrix for intrinsic XYZ Euler angles."""
    ex, ey, ez = np.asarray(euler, dtype=float)
    return rot_x(ex) @ rot_y(ey) @ rot_z(ez)


def matrix_to_euler(rot: np.ndarray) -> np.ndarray:
    """Inverse of :func:`euler_to_matrix`, result wrapped to [0, 2*pi).

    At the gimbal singularity (|R[0,2]| == 1) the X/Z split is not unique;
    the Z angle is set to zero.
    """
    r02 = float(np.clip(rot[0, 2], -1.0, 1.0))
    ey = np.arcsin(r02)
    if abs(r02) < 1.0 - 1e-12:
        ex = np.arctan2(-rot[1, 2], rot[2, 2])
        ez = np.arctan2(-rot[0, 1], rot[0, 0])
    else:
        ex = np.arctan2(rot[2, 1], rot[1, 1])
        ez = 0.0
    return wrap_angle(np.array([ex, ey, ez]))


def up_offset_of(euler: np.ndarray) -> float:
    """Angle in [0, pi] between world +Y and the rotated local +Y axis."""
    local_up = euler_to_matrix(euler) @ WORLD_UP
    return float(np.arccos(np.clip(local_up @ WORLD_UP, -1.0, 1.0)))


def world_axis(euler: np.ndarray, local_axis: np.ndarray) -> np.ndarray:
    """A local axis expressed in world coordinates."""
    return euler_to_matrix(euler) @ np.asarray(local_axis, dtype=float)


def tilted_rotation(tilt: float, heading: float, spin: float) -> np.ndarray:
    """Euler angles for a rest pose: tilt from upright, then heading.

    Built as ``Ry(heading) @ Rx(tilt) @ Ry(spin)``: spin about the object's
    own vertical axis, tilt it over, then rotate the whole thing about the
    world Y axis. The up offset of the result equals ``tilt`` folded into
    [0, pi], for any heading and spin.
    """
    rot = rot_y(heading) @ rot_x(tilt) @ rot_y(spin)
    return matrix_to_euler(rot)


def perpendicular_unit(axis: np.ndarray, angle: float) -> np.ndarray:
    """Unit vector perpendicular to ``axis`` at position ``angle`` on the
    perpendicular circle. Basis choice is deterministic in ``axis``."""
    axis = np.asarray(axis, dtype=float)
    if abs(axis[1]) > 0.9:
        u = np.cross(axis, np.array([1.0, 0.0, 0.0]))
    else:
        u = np.cross(axis, WORLD_UP)
    u /= np.linalg.norm(u)
    w = np.cross(axis, u)
    w /= np.linalg.norm(w)
    return np.cos(angle) * u + np.sin(angle) * w
