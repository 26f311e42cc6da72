"""Triangle mesh container with derived quantities used by the rest of the package.

Meshes are immutable after construction: vertices in meters, triangles as
vertex index triples, per-triangle outward unit normals. Construction drops
degenerate triangles and flips the winding of the whole mesh when the signed
volume comes out negative, so normals point outward for watertight input.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import MeshLoadError

_DEGENERATE_AREA = 1e-12


@dataclass(frozen=True)
class MassProperties:
    """Volume-derived rigid body properties at a given uniform density."""

    mass: float
    center_of_mass: np.ndarray
    inertia: np.ndarray  # 3x3 tensor about the center of mass


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int64
    normals: np.ndarray = field(repr=False)  # (m, 3) outward unit normals
    areas: np.ndarray = field(repr=False)  # (m,) triangle areas
    bbox_lo: np.ndarray = field(repr=False)
    bbox_hi: np.ndarray = field(repr=False)
    surface_area: float = 0.0
    volume: float = 0.0

    @classmethod
    def from_arrays(cls, vertices, triangles, scale: float = 1.0) -> "TriangleMesh":
        if scale <= 0.0 or not np.isfinite(scale):
            raise MeshLoadError(f"scale must be a positive real, got {scale}")
        v = np.asarray(vertices, dtype=np.float64) * float(scale)
        t = np.asarray(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshLoadError("vertices must be an (n, 3) array")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshLoadError("triangles must be an (m, 3) index array")
        if not np.all(np.isfinite(v)):
            raise MeshLoadError("mesh contains non-finite vertex coordinates")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise MeshLoadError("triangle index out of range")

        cross = _tri_cross(v, t)
        areas = 0.5 * np.linalg.norm(cross, axis=1)
        keep = areas > _DEGENERATE_AREA
        t = t[keep]
        if len(t) == 0:
            raise MeshLoadError("mesh has no triangles with nonzero area")
        cross = cross[keep]
        areas = areas[keep]

        vol = _signed_volume(v, t)
        if vol < 0.0:
            # Reversed winding: flip every triangle so normals face outward.
            t = t[:, [0, 2, 1]].copy()
            cross = -cross
            vol = -vol

        normals = cross / np.linalg.norm(cross, axis=1, keepdims=True)
        return cls(
            vertices=v,
            triangles=t,
            normals=normals,
            areas=areas,
            bbox_lo=v.min(axis=0),
            bbox_hi=v.max(axis=0),
            surface_area=float(areas.sum()),
            volume=float(vol),
        )

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def triangle_corners(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Corner position arrays (a, b, c), each (m, 3)."""
        v, t = self.vertices, self.triangles
        return v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]

    def content_hash(self) -> str:
        """Stable hex digest of the mesh geometry, for run compatibility checks."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.triangles).tobytes())
        return h.hexdigest()[:16]

    def mass_properties(self, density: float) -> MassProperties:
        """Mass, center of mass and inertia tensor for a uniform solid interior.

        Uses the standard signed-tetrahedron decomposition, so the mesh must
        be watertight with outward normals for the numbers to mean anything.
        """
        a, b, c = self.triangle_corners()
        det = np.einsum("ij,ij->i", a, np.cross(b, c))
        vol = det.sum() / 6.0
        if vol <= 0.0:
            raise ValueError("mass properties require a watertight mesh with positive volume")
        com = (det[:, None] * (a + b + c)).sum(axis=0) / (24.0 * vol)

        # Canonical tetrahedron covariance, accumulated over signed tets.
        canon = (np.full((3, 3), 1.0) + np.eye(3)) / 120.0
        m = np.stack([a, b, c], axis=1)  # (m, corner, coord)
        cov = np.einsum("n,nki,kl,nlj->ij", det, m, canon, m)
        mass = density * vol
        cov *= density
        # Shift to the center of mass, then convert covariance to inertia.
        cov -= mass * np.outer(com, com)
        inertia = np.eye(3) * np.trace(cov) - cov
        return MassProperties(mass=float(mass), center_of_mass=com, inertia=inertia)


def _tri_cross(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    return np.cross(b - a, c - a)


def _signed_volume(v: np.ndarray, t: np.ndarray) -> float:
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)
