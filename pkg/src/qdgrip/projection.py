"""Decoding normalized genomes into grasp poses.

Every sampling scheme shares one genome shape: a vector in [-1, 1]^n tagged
with the prior that interprets it. The three priors narrow where grasps can
land (near a surface point, inside an approach cone, on an antipodal contact
pair); the direct encoding spans the whole pose space around the object.
Projections are deterministic and total except for the antipodal scheme,
which rejects candidates that fail its opposed-contacts test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import MeshQuery, SurfaceSampleSet, TriangleMesh, nearest_contact
from .gripper import GraspPose, GripperFrame, GripperSpec, approach_distance_max, palm_frame_from_approach
from .mathutil import angle_between, euler_zyx_matrix, quat_from_matrix, tangent_basis, unit

APPROACH_CONE = np.pi / 4  # half-aperture of the approach direction cone
CONTACT_CONE = np.pi  # the contact prior is the approach prior with a full cone
ANTIPODAL_TOL = np.pi / 6  # max angle between n1 and -n2 for an accepted pair

PRIORS = ("contact", "approach", "antipodal", "direct")

_BASE_LEN = {"approach": 7, "contact": 7, "antipodal": 4, "direct": 6}


@dataclass(frozen=True)
class Genome:
    """A point of the search space: values in [-1, 1] plus its prior tag."""

    values: np.ndarray
    prior: str


def base_len(prior: str) -> int:
    return _BASE_LEN[prior]


def genome_length(prior: str, spec: GripperSpec) -> int:
    """Gene count: prior base genes, a synergy gene when there is a choice,
    then one gene per free joint."""
    extra = (1 if spec.n_synergies > 1 else 0) + spec.k_free_joints
    return _BASE_LEN[prior] + extra


def random_genome(rng: np.random.Generator, prior: str, spec: GripperSpec) -> Genome:
    return Genome(rng.uniform(-1.0, 1.0, genome_length(prior, spec)), prior)


def mutate(
    rng: np.random.Generator,
    genome: Genome,
    sigma: float = 0.1,
    ind_pb: float = 0.3,
) -> Genome:
    """Per-gene Gaussian mutation, each gene touched with probability ind_pb.

    Output genes are clamped back into [-1, 1].
    """
    v = genome.values.copy()
    touched = rng.random(len(v)) < ind_pb
    v[touched] += rng.normal(0.0, sigma, int(touched.sum()))
    return Genome(np.clip(v, -1.0, 1.0), genome.prior)


def _halves(values: np.ndarray) -> np.ndarray:
    return (np.asarray(values, float) + 1.0) / 2.0


def _trailing(spec: GripperSpec, u: np.ndarray) -> tuple[int, tuple[float, ...]]:
    """Synergy id and initial joint angles from the trailing genes."""
    pos = 0
    synergy_id = 0
    if spec.n_synergies > 1:
        synergy_id = min(int(u[pos] * spec.n_synergies), spec.n_synergies - 1)
        pos += 1
    joints = tuple(
        lo + u[pos + j] * (hi - lo) for j, (lo, hi) in enumerate(spec.free_joint_ranges)
    )
    return synergy_id, joints


def project_approach(
    genome: Genome,
    sset: SurfaceSampleSet,
    spec: GripperSpec,
    cone: float = APPROACH_CONE,
) -> GraspPose:
    """Decode an approach-family genome (gene layout: finder point, stand-off,
    cone angle, cone azimuth, wrist roll, then trailing hand genes).

    The finder point denormalizes into the object bounding box and snaps to
    the nearest surface sample, which keeps the decoding local: nearby
    genomes aim at nearby surface points.
    """
    u = _halves(genome.values)
    if len(u) != genome_length(genome.prior, spec):
        raise ValueError(f"genome length {len(u)} wrong for prior {genome.prior!r}")
    finder = sset.bbox_lo + u[0:3] * (sset.bbox_hi - sset.bbox_lo)
    target = nearest_contact(sset, finder)
    d = u[3] * approach_distance_max(spec)
    nu = u[4] * cone
    xi = u[5] * 2.0 * np.pi
    omega = u[6] * 2.0 * np.pi
    frame = palm_frame_from_approach(target.position, target.normal, d, nu, xi, omega)
    synergy_id, joints = _trailing(spec, u[7:])
    return GraspPose(frame.origin, frame.quaternion(), synergy_id, joints, nu=nu)


def project_antipodal(
    genome: Genome,
    sset: SurfaceSampleSet,
    mesh: TriangleMesh | MeshQuery,
    spec: GripperSpec,
    tol: float = ANTIPODAL_TOL,
) -> GraspPose | None:
    """Decode an antipodal genome, or return None when the pair test fails.

    The first contact comes from the finder point as in the approach prior.
    Shooting a ray against the first normal, the last surface intersection
    becomes the second contact; the pair is accepted when the normals oppose
    within ``tol``. The jaw axis lies along the ray, the origin sits at the
    contact midpoint, and the last gene rolls the hand about the axis.
    """
    query = mesh if isinstance(mesh, MeshQuery) else MeshQuery(mesh)
    u = _halves(genome.values)
    if len(u) != genome_length(genome.prior, spec):
        raise ValueError(f"genome length {len(u)} wrong for prior {genome.prior!r}")
    finder = sset.bbox_lo + u[0:3] * (sset.bbox_hi - sset.bbox_lo)
    first = nearest_contact(sset, finder)
    direction = -first.normal
    ts, ids = query.ray_hits(first.position, direction)
    if len(ts) == 0:
        return None
    p2 = first.position + ts[-1] * direction
    n2 = query.mesh.normals[ids[-1]]
    if angle_between(first.normal, -n2) > tol:
        return None

    x = unit(direction)
    t1, t2 = tangent_basis(x)
    roll = u[3] * 2.0 * np.pi
    y = np.cos(roll) * t1 + np.sin(roll) * t2
    frame = GripperFrame(0.5 * (first.position + p2), x, y, np.cross(x, y))
    synergy_id, joints = _trailing(spec, u[4:])
    return GraspPose(frame.origin, frame.quaternion(), synergy_id, joints)


def project_direct(
    genome: Genome, mesh: TriangleMesh | MeshQuery, spec: GripperSpec
) -> GraspPose:
    """Decode a prior-free genome: spherical position in the object frame
    plus intrinsic z-y-x Euler angles, then trailing hand genes."""
    if isinstance(mesh, MeshQuery):
        mesh = mesh.mesh
    u = _halves(genome.values)
    if len(u) != genome_length(genome.prior, spec):
        raise ValueError(f"genome length {len(u)} wrong for prior {genome.prior!r}")
    rho = u[0] * rho_max(mesh, spec)
    polar = u[1] * np.pi
    azimuth = u[2] * 2.0 * np.pi
    position = rho * np.array(
        [
            np.sin(polar) * np.cos(azimuth),
            np.sin(polar) * np.sin(azimuth),
            np.cos(polar),
        ]
    )
    rot = euler_zyx_matrix(u[3] * 2.0 * np.pi, u[4] * 2.0 * np.pi, u[5] * 2.0 * np.pi)
    synergy_id, joints = _trailing(spec, u[6:])
    return GraspPose(position, quat_from_matrix(rot), synergy_id, joints)


def rho_max(mesh: TriangleMesh, spec: GripperSpec) -> float:
    """Radius of the direct encoding's position ball around the object."""
    half_diag = 0.5 * float(np.linalg.norm(mesh.bbox_hi - mesh.bbox_lo))
    return 1.5 * (half_diag + approach_distance_max(spec))


def project(
    genome: Genome,
    sset: SurfaceSampleSet,
    mesh: TriangleMesh | MeshQuery,
    spec: GripperSpec,
) -> GraspPose | None:
    """Dispatch a genome to its prior's projection."""
    if genome.prior == "approach":
        return project_approach(genome, sset, spec, APPROACH_CONE)
    if genome.prior == "contact":
        return project_approach(genome, sset, spec, CONTACT_CONE)
    if genome.prior == "antipodal":
        return project_antipodal(genome, sset, mesh, spec, ANTIPODAL_TOL)
    if genome.prior == "direct":
        return project_direct(genome, mesh, spec)
    raise ValueError(f"unknown prior {genome.prior!r}")
