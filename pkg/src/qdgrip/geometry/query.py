"""Accelerated geometric queries against a fixed triangle mesh.

A MeshQuery snapshots the triangle corner arrays and per-triangle bounding
boxes once, then answers the queries the grasp pipeline leans on: all-hits
ray casting, inside/outside tests, primitive overlap, and batched
segment-to-surface distances restricted to a candidate triangle subset.
"""

from __future__ import annotations

import numpy as np

from .distance import closest_point_segment_triangle, segment_triangle_distance
from .mesh import TriangleMesh
from .primitives import Box, Capsule

_RAY_EPS = 1e-9
# Fixed probe direction for parity tests, chosen away from any axis plane.
_PARITY_DIR = np.array([0.2937457241, 0.7143589134, 0.6352436069])
_PARITY_DIR /= np.linalg.norm(_PARITY_DIR)


class MeshQuery:
    def __init__(self, mesh: TriangleMesh):
        self.mesh = mesh
        a, b, c = mesh.triangle_corners()
        self.a, self.b, self.c = a, b, c
        self.tri_lo = np.minimum(np.minimum(a, b), c)
        self.tri_hi = np.maximum(np.maximum(a, b), c)
        self.tri_n = np.cross(b - a, c - a)  # unnormalized face normals
        # Centroid bounding spheres, used as a cheap distance lower bound.
        self.tri_center = (a + b + c) / 3.0
        self.tri_ball = np.sqrt(
            np.maximum(
                ((a - self.tri_center) ** 2).sum(axis=1),
                np.maximum(
                    ((b - self.tri_center) ** 2).sum(axis=1),
                    ((c - self.tri_center) ** 2).sum(axis=1),
                ),
            )
        )

    # ------------------------------------------------------------------ rays

    def ray_hits(self, origin, direction) -> tuple[np.ndarray, np.ndarray]:
        """All ray intersections beyond the self-hit epsilon.

        Returns (t, triangle_id) sorted by ascending t, with t measured in
        meters along the normalized direction.
        """
        origin = np.asarray(origin, float)
        d = np.asarray(direction, float)
        d = d / np.linalg.norm(d)

        e1 = self.b - self.a
        e2 = self.c - self.a
        pvec = np.cross(d, e2)
        det = np.einsum("ij,ij->i", e1, pvec)
        ok = np.abs(det) > 1e-14
        inv = np.where(ok, det, 1.0)
        tvec = origin - self.a
        u = np.einsum("ij,ij->i", tvec, pvec) / inv
        qvec = np.cross(tvec, e1)
        v = np.einsum("j,ij->i", d, qvec) / inv
        t = np.einsum("ij,ij->i", e2, qvec) / inv
        hit = ok & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > _RAY_EPS)
        ids = np.nonzero(hit)[0]
        order = np.argsort(t[ids], kind="stable")
        return t[ids][order], ids[order]

    def point_inside(self, point) -> bool:
        """Even-odd parity along a fixed probe direction."""
        t, _ = self.ray_hits(point, _PARITY_DIR)
        return len(t) % 2 == 1

    # --------------------------------------------------------------- culling

    def candidates_in_aabb(self, lo, hi) -> np.ndarray:
        """Indices of triangles whose bounding boxes touch [lo, hi]."""
        m = np.all(self.tri_hi >= lo, axis=1) & np.all(self.tri_lo <= hi, axis=1)
        return np.nonzero(m)[0]

    # ------------------------------------------------------------- distances

    def segment_distances(self, p0: np.ndarray, p1: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Min distance from each segment to the triangle subset ``idx``.

        p0/p1 have shape (k, 3); the result has shape (k,). Returns +inf
        when idx is empty.
        """
        if len(idx) == 0:
            return np.full(len(p0), np.inf)
        return self.segment_distance_matrix(p0, p1, idx).min(axis=1)

    def segment_distance_matrix(self, p0: np.ndarray, p1: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Per-pair distances, shape (len(p0), len(idx))."""
        return segment_triangle_distance(
            p0[:, None, :], p1[:, None, :],
            self.a[idx][None], self.b[idx][None], self.c[idx][None],
            tri_normal=self.tri_n[idx][None],
        )

    def segment_bound_matrix(self, p0: np.ndarray, p1: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Lower bound on segment_distance_matrix via triangle bounding spheres.

        Much cheaper than the exact distance; may go negative near the mesh.
        """
        v = p1 - p0  # (k, 3)
        w = self.tri_center[idx][None] - p0[:, None]  # (k, n, 3)
        vv = np.maximum((v * v).sum(axis=1), 1e-300)
        t = np.clip(np.einsum("kj,knj->kn", v, w) / vv[:, None], 0.0, 1.0)
        diff = w - t[:, :, None] * v[:, None]
        return np.sqrt(np.einsum("knj,knj->kn", diff, diff)) - self.tri_ball[idx][None]

    def segment_distance_matrix_pruned(
        self, p0: np.ndarray, p1: np.ndarray, idx: np.ndarray, threshold: float
    ) -> np.ndarray:
        """Distance matrix that is exact at or below ``threshold``.

        Entries whose bounding-sphere lower bound exceeds the threshold keep
        that (over-)optimistic bound, which is all a caller comparing against
        the threshold can observe. Exact entries are computed pairwise, so
        sparse near sets cost far less than the full cross product.
        """
        d = self.segment_bound_matrix(p0, p1, idx)
        si, ti = np.nonzero(d <= threshold)
        if len(si):
            tri = idx[ti]
            d[si, ti] = segment_triangle_distance(
                p0[si], p1[si], self.a[tri], self.b[tri], self.c[tri],
                tri_normal=self.tri_n[tri],
            )
        return d

    def segment_closest_triangle(
        self, p0: np.ndarray, p1: np.ndarray, idx: np.ndarray
    ) -> tuple[int, float]:
        """Triangle of ``idx`` closest to one segment, with the distance."""
        d = segment_triangle_distance(
            p0[None], p1[None], self.a[idx][None], self.b[idx][None], self.c[idx][None]
        )[0]
        k = int(np.argmin(d))
        return int(idx[k]), float(d[k])

    def segment_contact(self, p0: np.ndarray, p1: np.ndarray, idx: np.ndarray):
        """Closest pair against the subset: (tri_id, point_on_tri, point_on_seg, distance)."""
        tri, _ = self.segment_closest_triangle(p0, p1, idx)
        on_seg, on_tri, dist = closest_point_segment_triangle(
            p0, p1, self.a[tri], self.b[tri], self.c[tri]
        )
        return tri, on_tri, on_seg, dist

    # --------------------------------------------------------------- overlap

    def box_overlaps(self, box: Box) -> bool:
        radius = float(np.linalg.norm(box.half_extents))
        idx = self.candidates_in_aabb(box.center - radius, box.center + radius)
        if len(idx) == 0:
            return False
        # Triangle corners in the box frame (rows of R.T are the box axes).
        rot_t = box.rotation.T
        a = (self.a[idx] - box.center) @ rot_t.T
        b = (self.b[idx] - box.center) @ rot_t.T
        c = (self.c[idx] - box.center) @ rot_t.T
        return bool(np.any(_sat_box_triangles(box.half_extents, a, b, c)))

    def capsule_overlaps(self, capsule: Capsule) -> bool:
        lo, hi = capsule.aabb()
        idx = self.candidates_in_aabb(lo, hi)
        if len(idx) == 0:
            return False
        d = self.segment_distances(capsule.p0[None], capsule.p1[None], idx)[0]
        return bool(d <= capsule.radius)


def intersects_convex(mesh_or_query: TriangleMesh | MeshQuery, shape: Box | Capsule) -> bool:
    """True iff the primitive intersects the mesh surface or lies inside it."""
    q = mesh_or_query if isinstance(mesh_or_query, MeshQuery) else MeshQuery(mesh_or_query)
    if isinstance(shape, Box):
        if q.box_overlaps(shape):
            return True
        center = shape.center
    elif isinstance(shape, Capsule):
        if q.capsule_overlaps(shape):
            return True
        center = 0.5 * (shape.p0 + shape.p1)
    else:
        raise TypeError(f"unsupported primitive {type(shape).__name__}")
    # No surface crossing: the primitive is entirely inside or outside.
    return q.point_inside(center)


def _sat_box_triangles(half: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Separating-axis box/triangle test, box axis-aligned at the origin.

    Returns a boolean overlap flag per triangle.
    """
    overlap = np.ones(len(a), dtype=bool)
    verts = np.stack([a, b, c], axis=1)  # (m, 3 corners, 3)

    # Box face axes.
    vmin = verts.min(axis=1)
    vmax = verts.max(axis=1)
    overlap &= np.all(vmax >= -half, axis=1) & np.all(vmin <= half, axis=1)

    # Triangle plane.
    n = np.cross(b - a, c - a)
    r = np.abs(n) @ half
    dist = np.einsum("ij,ij->i", n, a)
    overlap &= np.abs(dist) <= r

    # Nine edge cross axes.
    edges = (b - a, c - b, a - c)
    for e in edges:
        for k in range(3):
            axis = np.zeros_like(e)
            # cross(e_k, edge) for unit axis e_k, written out per component
            axis[:, (k + 1) % 3] = -e[:, (k + 2) % 3]
            axis[:, (k + 2) % 3] = e[:, (k + 1) % 3]
            proj = np.einsum("mkj,mj->mk", verts, axis)
            rad = np.abs(axis) @ half
            overlap &= (proj.min(axis=1) <= rad) & (proj.max(axis=1) >= -rad)
    return overlap
