"""Procedural watertight test meshes.

These generators back the test suite and the bundled demo configurations;
nothing in the engine depends on them. All dimensions are meters and every
mesh is centered near the coordinate origin used as the object frame.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .mesh import TriangleMesh

# Golden-ratio icosahedron, outward winding.
_PHI = (1.0 + np.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array(
    [
        (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
        (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
        (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
    ],
    dtype=float,
)
_ICO_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ],
    dtype=np.int64,
)


def box(size_x: float, size_y: float, size_z: float) -> TriangleMesh:
    """Axis-aligned solid box centered at the origin."""
    hx, hy, hz = size_x / 2.0, size_y / 2.0, size_z / 2.0
    v = np.array(
        [
            (-hx, -hy, -hz), (hx, -hy, -hz), (hx, hy, -hz), (-hx, hy, -hz),
            (-hx, -hy, hz), (hx, -hy, hz), (hx, hy, hz), (-hx, hy, hz),
        ]
    )
    f = np.array(
        [
            (0, 2, 1), (0, 3, 2),  # -z
            (4, 5, 6), (4, 6, 7),  # +z
            (0, 1, 5), (0, 5, 4),  # -y
            (2, 3, 7), (2, 7, 6),  # +y
            (1, 2, 6), (1, 6, 5),  # +x
            (3, 0, 4), (3, 4, 7),  # -x
        ],
        dtype=np.int64,
    )
    return TriangleMesh.from_arrays(v, f)


def cube(edge: float) -> TriangleMesh:
    return box(edge, edge, edge)


def icosphere(radius: float, subdivisions: int = 2) -> TriangleMesh:
    """Geodesic sphere: subdivided icosahedron projected onto the radius."""
    verts = [tuple(p) for p in _ICO_VERTS / np.linalg.norm(_ICO_VERTS[0])]
    faces = [tuple(f) for f in _ICO_FACES]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                p = np.array(verts[i]) + np.array(verts[j])
                p /= np.linalg.norm(p)
                cache[key] = len(verts)
                verts.append(tuple(p))
            return cache[key]

        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = next_faces
    v = np.array(verts) * radius
    return TriangleMesh.from_arrays(v, np.array(faces, dtype=np.int64))


def mug(
    outer_radius: float = 0.030,
    inner_radius: float = 0.024,
    height: float = 0.06,
    bottom: float = 0.008,
    segments: int = 20,
) -> TriangleMesh:
    """Open hollow cup: the non-convex workhorse of the test fleet.

    The wall between the inner and outer cylinders and the recessed floor
    give it both thin pinchable features and a cavity no straight chord
    through the axis avoids.
    """
    if not (0.0 < inner_radius < outer_radius and 0.0 < bottom < height):
        raise ValueError("mug dimensions are inconsistent")
    th = np.linspace(0.0, 2.0 * np.pi, segments, endpoint=False)
    ring = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=1)
    up = np.array([0.0, 0.0, 1.0])

    verts = [
        ring * outer_radius,                    # A: outer base, z=0
        ring * outer_radius + up * height,      # B: outer top
        ring * inner_radius + up * height,      # C: inner top (rim edge)
        ring * inner_radius + up * bottom,      # D: cavity floor edge
    ]
    v = np.concatenate(verts + [np.array([[0.0, 0.0, 0.0], [0.0, 0.0, bottom]])])
    a0, b0, c0, d0 = 0, segments, 2 * segments, 3 * segments
    o_bot, o_floor = 4 * segments, 4 * segments + 1

    f: list[tuple[int, int, int]] = []
    for j in range(segments):
        k = (j + 1) % segments
        f += [(a0 + j, a0 + k, b0 + k), (a0 + j, b0 + k, b0 + j)]  # outer wall
        f += [(b0 + j, b0 + k, c0 + k), (b0 + j, c0 + k, c0 + j)]  # rim annulus
        f += [(c0 + j, c0 + k, d0 + k), (c0 + j, d0 + k, d0 + j)]  # inner wall
        f += [(o_floor, d0 + j, d0 + k)]                           # cavity floor
        f += [(o_bot, a0 + k, a0 + j)]                             # underside
    return TriangleMesh.from_arrays(v, np.array(f, dtype=np.int64))


def wedge(apex_angle: float, height: float = 0.06, depth: float = 0.05) -> TriangleMesh:
    """Triangular prism whose two slanted faces meet at ``apex_angle`` (radians).

    A straight shot from one slant face to the other sees surface normals
    misaligned by exactly the apex angle, which makes this the reference
    shape for opposition-tolerance behavior.
    """
    w = height * np.tan(apex_angle / 2.0)
    hd = depth / 2.0
    v = np.array(
        [
            (-w, -hd, 0.0), (w, -hd, 0.0), (0.0, -hd, height),
            (-w, hd, 0.0), (w, hd, 0.0), (0.0, hd, height),
        ]
    )
    f = np.array(
        [
            (0, 2, 1), (3, 4, 5),              # end caps (-y, +y)
            (0, 1, 4), (0, 4, 3),              # base, facing -z
            (1, 2, 5), (1, 5, 4),              # +x slant
            (2, 0, 3), (2, 3, 5),              # -x slant
        ],
        dtype=np.int64,
    )
    return TriangleMesh.from_arrays(v, f)


def save_obj(mesh: TriangleMesh, path: str | Path) -> Path:
    """Write the mesh as a minimal Wavefront OBJ file."""
    path = Path(path)
    lines = []
    for x, y, z in mesh.vertices:
        lines.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
    for a, b, c in mesh.triangles:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    path.write_text("\n".join(lines) + "\n")
    return path
