"""Mesh file loading for Wavefront OBJ and STL (ASCII and binary).

Only vertex positions and triangular faces are read; materials, texture
coordinates and per-vertex normals are ignored. Polygonal OBJ faces are
fan-triangulated. Coordinates are interpreted as meters after applying the
uniform scale factor.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import MeshLoadError
from .mesh import TriangleMesh


def load_mesh(path: str | Path, scale: float = 1.0) -> TriangleMesh:
    """Load a triangle mesh from an .obj or .stl file."""
    path = Path(path)
    if not path.is_file():
        raise MeshLoadError(f"mesh file not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".obj":
        vertices, triangles = _parse_obj(path)
    elif suffix == ".stl":
        vertices, triangles = _parse_stl(path)
    else:
        raise MeshLoadError(f"unsupported mesh format {suffix!r} (expected .obj or .stl)")
    return TriangleMesh.from_arrays(vertices, triangles, scale=scale)


def _parse_obj(path: Path) -> tuple[np.ndarray, np.ndarray]:
    vertices: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    with open(path, "r", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshLoadError(f"{path}:{lineno}: malformed vertex line")
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as exc:
                    raise MeshLoadError(f"{path}:{lineno}: {exc}") from exc
            elif tag == "f":
                if len(parts) < 4:
                    raise MeshLoadError(f"{path}:{lineno}: face needs at least 3 vertices")
                idx = [_obj_index(p, len(vertices), path, lineno) for p in parts[1:]]
                for k in range(1, len(idx) - 1):
                    faces.append((idx[0], idx[k], idx[k + 1]))
    if not vertices or not faces:
        raise MeshLoadError(f"{path}: no triangles found")
    return np.array(vertices, dtype=np.float64), np.array(faces, dtype=np.int64)


def _obj_index(token: str, n_vertices: int, path: Path, lineno: int) -> int:
    head = token.split("/", 1)[0]
    try:
        i = int(head)
    except ValueError as exc:
        raise MeshLoadError(f"{path}:{lineno}: bad face index {token!r}") from exc
    if i < 0:
        i = n_vertices + i  # negative indices count back from the latest vertex
    else:
        i -= 1
    if i < 0 or i >= n_vertices:
        raise MeshLoadError(f"{path}:{lineno}: face index {token!r} out of range")
    return i


def _parse_stl(path: Path) -> tuple[np.ndarray, np.ndarray]:
    data = path.read_bytes()
    if len(data) < 15:
        raise MeshLoadError(f"{path}: file too short for STL")
    if _is_binary_stl(data):
        return _parse_stl_binary(data, path)
    return _parse_stl_ascii(data, path)


def _is_binary_stl(data: bytes) -> bool:
    if len(data) < 84:
        return False
    (count,) = struct.unpack_from("<I", data, 80)
    if len(data) == 84 + 50 * count:
        return True
    # Trust the "solid" marker only when the size check was inconclusive.
    return not data[:5].lower().startswith(b"solid")


def _parse_stl_binary(data: bytes, path: Path) -> tuple[np.ndarray, np.ndarray]:
    (count,) = struct.unpack_from("<I", data, 80)
    if len(data) < 84 + 50 * count:
        raise MeshLoadError(f"{path}: truncated binary STL")
    raw = np.frombuffer(data, dtype=np.uint8, count=50 * count, offset=84)
    tris = raw.reshape(count, 50)[:, 12:48].copy().view("<f4").reshape(count, 3, 3)
    vertices = tris.reshape(-1, 3).astype(np.float64)
    triangles = np.arange(3 * count, dtype=np.int64).reshape(count, 3)
    return _weld(vertices, triangles)


def _parse_stl_ascii(data: bytes, path: Path) -> tuple[np.ndarray, np.ndarray]:
    vertices: list[list[float]] = []
    for lineno, raw in enumerate(data.decode(errors="replace").splitlines(), start=1):
        parts = raw.split()
        if parts[:1] == ["vertex"]:
            if len(parts) < 4:
                raise MeshLoadError(f"{path}:{lineno}: malformed vertex line")
            try:
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError as exc:
                raise MeshLoadError(f"{path}:{lineno}: {exc}") from exc
    if not vertices or len(vertices) % 3 != 0:
        raise MeshLoadError(f"{path}: ASCII STL vertex count is not a multiple of 3")
    v = np.array(vertices, dtype=np.float64)
    t = np.arange(len(vertices), dtype=np.int64).reshape(-1, 3)
    return _weld(v, t)


def _weld(vertices: np.ndarray, triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge exactly-coincident vertices so STL soup becomes a connected mesh."""
    uniq, inverse = np.unique(vertices, axis=0, return_inverse=True)
    return uniq, inverse[triangles.ravel()].reshape(-1, 3)
