from .mesh import MassProperties, TriangleMesh
from .loaders import load_mesh
from .primitives import Box, Capsule
from .query import MeshQuery, intersects_convex
from .sampling import ContactSample, SurfaceSampleSet, nearest_contact, sample_surface
from .spatial import HashGrid

__all__ = [
    "Box",
    "Capsule",
    "ContactSample",
    "HashGrid",
    "MassProperties",
    "MeshQuery",
    "SurfaceSampleSet",
    "TriangleMesh",
    "intersects_convex",
    "load_mesh",
    "nearest_contact",
    "sample_surface",
]
