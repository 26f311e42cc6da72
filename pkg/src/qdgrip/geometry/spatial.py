"""Uniform hash grid for exact nearest-neighbor queries over a point cloud.

Cells are cubes keyed by integer coordinates in a dict. Queries expand
Chebyshev shells outward from the query cell; a shell at distance r can only
contain points closer than (r - 1) * cell_size, so the search stops as soon
as the best hit beats that bound. Results are exact and tie-broken by the
lowest point index, matching a brute-force linear scan.
"""

from __future__ import annotations

import numpy as np


class HashGrid:
    def __init__(self, points: np.ndarray, cell_size: float):
        if cell_size <= 0.0:
            raise ValueError("cell_size must be positive")
        self.points = np.asarray(points, dtype=float)
        self.cell_size = float(cell_size)
        if len(self.points) == 0:
            raise ValueError("cannot index an empty point set")
        cells = np.floor(self.points / self.cell_size).astype(np.int64)
        self.cells: dict[tuple[int, int, int], np.ndarray] = {}
        order = np.lexsort((cells[:, 2], cells[:, 1], cells[:, 0]))
        sorted_cells = cells[order]
        boundaries = np.nonzero(np.any(np.diff(sorted_cells, axis=0) != 0, axis=1))[0] + 1
        for chunk in np.split(order, boundaries):
            key = tuple(int(x) for x in cells[chunk[0]])
            self.cells[key] = np.sort(chunk)
        self._cell_lo = cells.min(axis=0)
        self._cell_hi = cells.max(axis=0)

    def nearest(self, query: np.ndarray) -> tuple[int, float]:
        """Index and distance of the closest point; lowest index wins ties."""
        q = np.asarray(query, dtype=float)
        center = np.floor(q / self.cell_size).astype(np.int64)
        max_ring = int(
            np.max(np.maximum(np.abs(center - self._cell_lo), np.abs(self._cell_hi - center)))
        )
        best_idx = -1
        best_d = np.inf
        for ring in range(max_ring + 1):
            # Strict: an unvisited shell could still hold an equal-distance,
            # lower-index point when best_d matches the bound exactly.
            if best_idx >= 0 and best_d < (ring - 1) * self.cell_size:
                break
            idx = self._ring_indices(center, ring)
            if len(idx) == 0:
                continue
            d = np.linalg.norm(self.points[idx] - q, axis=1)
            k = int(np.argmin(d))  # idx ascending, so first min is lowest index
            if d[k] < best_d or (d[k] == best_d and idx[k] < best_idx):
                best_idx = int(idx[k])
                best_d = float(d[k])
        return best_idx, best_d

    def _ring_indices(self, center: np.ndarray, ring: int) -> np.ndarray:
        found = []
        cx, cy, cz = (int(v) for v in center)
        if ring == 0:
            hit = self.cells.get((cx, cy, cz))
            return hit if hit is not None else np.empty(0, dtype=np.int64)
        for dx in range(-ring, ring + 1):
            for dy in range(-ring, ring + 1):
                for dz in range(-ring, ring + 1):
                    if max(abs(dx), abs(dy), abs(dz)) != ring:
                        continue
                    hit = self.cells.get((cx + dx, cy + dy, cz + dz))
                    if hit is not None:
                        found.append(hit)
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(found))
