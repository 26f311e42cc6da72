"""Small rotation / vector helpers used throughout the package.

Everything here is deterministic: the same inputs produce bit-identical
outputs, which the engine relies on for reproducible archives.
"""

from __future__ import annotations

import numpy as np

_EPS = 1e-12


def unit(v: np.ndarray) -> np.ndarray:
    """Return v normalized to unit length.

    Raises ValueError on a (near-)zero vector rather than returning junk.
    """
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n < _EPS:
        raise ValueError("cannot normalize a zero-length vector")
    return v / n


def tangent_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal tangent pair (t1, t2) for a unit vector n.

    The helper axis is the world axis with the smallest |component| of n
    (lowest index on ties), so nearby normals get nearby bases.
    """
    n = np.asarray(n, dtype=float)
    k = int(np.argmin(np.abs(n)))
    e = np.zeros(3)
    e[k] = 1.0
    t1 = np.cross(n, e)
    t1 = t1 / np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return t1, t2


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a unit axis and angle in radians."""
    a = unit(axis)
    c, s = np.cos(angle), np.sin(angle)
    x, y, z = a
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) * c + s * k + (1.0 - c) * np.outer(a, a)


def rotate_about(v: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotate vector v about a unit axis by angle (Rodrigues, no matrix)."""
    a = unit(axis)
    v = np.asarray(v, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    return v * c + np.cross(a, v) * s + a * float(np.dot(a, v)) * (1.0 - c)


def euler_zyx_matrix(yaw: float, pitch: float, roll: float) -> np.ndarray:
    """Rotation matrix for intrinsic Z-Y-X Euler angles (yaw, pitch, roll)."""
    cz, sz = np.cos(yaw), np.sin(yaw)
    cy, sy = np.cos(pitch), np.sin(pitch)
    cx, sx = np.cos(roll), np.sin(roll)
    rz = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]])
    return rz @ ry @ rx


def quat_from_matrix(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (x, y, z, w) from a rotation matrix.

    Uses the max-diagonal branch so the result is stable for all inputs;
    the sign is fixed so that w >= 0.
    """
    r = np.asarray(r, dtype=float)
    t = np.trace(r)
    if t > 0.0:
        s = np.sqrt(t + 1.0) * 2.0
        w = 0.25 * s
        x = (r[2, 1] - r[1, 2]) / s
        y = (r[0, 2] - r[2, 0]) / s
        z = (r[1, 0] - r[0, 1]) / s
    elif r[0, 0] >= r[1, 1] and r[0, 0] >= r[2, 2]:
        s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        w = (r[2, 1] - r[1, 2]) / s
        x = 0.25 * s
        y = (r[0, 1] + r[1, 0]) / s
        z = (r[0, 2] + r[2, 0]) / s
    elif r[1, 1] >= r[2, 2]:
        s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        w = (r[0, 2] - r[2, 0]) / s
        x = (r[0, 1] + r[1, 0]) / s
        y = 0.25 * s
        z = (r[1, 2] + r[2, 1]) / s
    else:
        s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        w = (r[1, 0] - r[0, 1]) / s
        x = (r[0, 2] + r[2, 0]) / s
        y = (r[1, 2] + r[2, 1]) / s
        z = 0.25 * s
    q = np.array([x, y, z, w])
    if q[3] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def matrix_from_quat(q: np.ndarray) -> np.ndarray:
    """Rotation matrix from a quaternion (x, y, z, w); normalizes the input."""
    q = np.asarray(q, dtype=float)
    n = float(np.linalg.norm(q))
    if n < _EPS:
        raise ValueError("zero quaternion")
    x, y, z, w = q / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def angle_between(a: np.ndarray, b: np.ndarray) -> float:
    """Angle in [0, pi] between two nonzero vectors."""
    ua, ub = unit(a), unit(b)
    return float(np.arccos(np.clip(np.dot(ua, ub), -1.0, 1.0)))
