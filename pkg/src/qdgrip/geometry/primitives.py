"""Convex collision primitives used to model the gripper body."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Box:
    """Oriented box: rotation columns are the box axes in world coordinates."""

    center: np.ndarray
    rotation: np.ndarray  # (3, 3), columns = local x/y/z axes
    half_extents: np.ndarray

    def corners(self) -> np.ndarray:
        signs = np.array(
            [(sx, sy, sz) for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float
        )
        return self.center + (signs * self.half_extents) @ self.rotation.T


@dataclass(frozen=True)
class Capsule:
    """Capsule: segment from p0 to p1 swept by a sphere of the given radius."""

    p0: np.ndarray
    p1: np.ndarray
    radius: float

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.minimum(self.p0, self.p1) - self.radius
        hi = np.maximum(self.p0, self.p1) + self.radius
        return lo, hi
