"""Area-weighted surface sampling and nearest-contact lookup.

The sample set is the bridge between genome space and the object surface:
genomes name arbitrary points, and the projection snaps them to the nearest
precomputed surface sample, inheriting its normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import TriangleMesh
from .spatial import HashGrid


@dataclass(frozen=True)
class ContactSample:
    """One candidate contact: a surface point, its outward normal, its triangle."""

    position: np.ndarray
    normal: np.ndarray
    triangle_id: int


@dataclass(frozen=True)
class SurfaceSampleSet:
    positions: np.ndarray  # (n, 3)
    normals: np.ndarray  # (n, 3)
    triangle_ids: np.ndarray  # (n,)
    seed: int
    bbox_lo: np.ndarray  # object bounding box, not the samples'
    bbox_hi: np.ndarray
    grid: HashGrid = field(repr=False)

    def __len__(self) -> int:
        return len(self.positions)

    def sample(self, i: int) -> ContactSample:
        return ContactSample(self.positions[i], self.normals[i], int(self.triangle_ids[i]))


def sample_surface(mesh: TriangleMesh, n_samples: int, seed: int) -> SurfaceSampleSet:
    """Draw ``n_samples`` area-weighted barycentric-uniform surface points.

    Deterministic for a given (mesh, n_samples, seed). Triangle selection
    uses inverse-CDF lookup over the cumulative area table, so per-triangle
    counts are multinomial with probabilities proportional to area.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    cum = np.cumsum(mesh.areas)
    tri = np.searchsorted(cum, rng.random(n_samples) * cum[-1], side="right")
    tri = np.minimum(tri, len(cum) - 1)

    u = rng.random(n_samples)
    v = rng.random(n_samples)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]

    a, b, c = mesh.triangle_corners()
    pos = a[tri] + u[:, None] * (b[tri] - a[tri]) + v[:, None] * (c[tri] - a[tri])
    cell = float(np.linalg.norm(mesh.bbox_hi - mesh.bbox_lo)) / 32.0
    return SurfaceSampleSet(
        positions=pos,
        normals=mesh.normals[tri],
        triangle_ids=tri.astype(np.int64),
        seed=seed,
        bbox_lo=mesh.bbox_lo.copy(),
        bbox_hi=mesh.bbox_hi.copy(),
        grid=HashGrid(pos, cell),
    )


def nearest_contact(samples: SurfaceSampleSet, point: np.ndarray) -> ContactSample:
    """Closest sample to ``point``; exact, lowest sample index on ties."""
    idx, _ = samples.grid.nearest(point)
    return samples.sample(idx)
