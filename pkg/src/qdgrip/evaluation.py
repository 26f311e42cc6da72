"""Quasi-static grasp scoring.

A grasp is scored by closing the hand on the object and then asking whether
the resulting contact set can balance a short sequence of disturbance
wrenches: gravity combined with a linear jolt, then gravity combined with an
angular jolt, each applied in both directions.  The fitness is the number of
consecutive disturbances survived, so a parallel-jaw pinch that holds through
both phases scores 2.

Force balance uses the standard rigid-body point-contact model: each contact
contributes a linearized Coulomb friction cone, and a wrench is resisted when
it lies in the nonnegative span of the cone edge wrenches.  There are no
force magnitude limits, so only wrench directions matter.

``evaluate_mdr`` wraps the same test in a Monte-Carlo loop over perturbed
object poses and friction coefficients and sums the per-trial scores, which
rewards grasps that keep working when the world model is slightly wrong.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, nnls

from .errors import ConfigError
from .geometry.mesh import MassProperties, TriangleMesh
from .geometry.query import MeshQuery, intersects_convex
from .gripper import (
    GraspPose,
    GripperSpec,
    close_fingers,
    contact_manifold,
    open_primitives,
)
from .mathutil import (
    matrix_from_quat,
    quat_from_matrix,
    rotation_about_axis,
    tangent_basis,
    unit,
)

N_SHAKES = 2
MDR_TRIALS = 100
MDR_MAX_FITNESS = N_SHAKES * MDR_TRIALS
MDR_SIGMA_POS = 0.005  # m
MDR_SIGMA_ROT = np.deg2rad(30.0)
MDR_SIGMA_FRICTION = 0.1

# A wrench counts as resisted when the contact cone reaches within this
# distance of the unit-normalized target.
RESIST_TOL = 1e-8


@dataclass(frozen=True)
class PhysicsParams:
    """Physical constants of one evaluation setting.

    Axes are expressed in the object frame and need not be unit length.
    """

    friction: float = 0.5
    density: float = 500.0  # kg/m^3, uniform solid interior
    gravity: float = 9.81  # m/s^2
    gravity_dir: tuple[float, float, float] = (0.0, 0.0, -1.0)
    shake_accel: float = 2.0  # m/s^2, linear jolt
    shake_axis: tuple[float, float, float] = (1.0, 0.0, 0.0)
    spin_accel: float = 3.0  # rad/s^2, angular jolt
    spin_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    cone_edges: int = 8
    # Soft-finger term: effective contact patch radius (m).  A pressed pad
    # flattens and resists spin about the contact normal with torque up to
    # friction * torsion_patch per unit normal force; impulse-based engines
    # model the same effect as spinning friction.  Zero gives hard points.
    torsion_patch: float = 0.004

    def __post_init__(self):
        if self.friction <= 0.0:
            raise ConfigError("friction coefficient must be positive")
        if self.density <= 0.0:
            raise ConfigError("density must be positive")
        if self.cone_edges < 4:
            raise ConfigError("friction cones need at least 4 edges")


@dataclass(frozen=True)
class Contact:
    """One finger-object contact: surface point, outward normal, finger index."""

    point: np.ndarray
    normal: np.ndarray
    finger: int


@dataclass(frozen=True)
class EvaluationResult:
    valid: bool
    fitness: float  # integer-valued 0..N_SHAKES, or 0..MDR_MAX_FITNESS summed
    behavior: np.ndarray  # gripper frame origin in object coordinates
    nu: float | None = None
    contacts: tuple[Contact, ...] = ()


class EvaluationContext:
    """Caches the spatial index and mass properties of one object."""

    def __init__(self, mesh: TriangleMesh | MeshQuery):
        self.query = mesh if isinstance(mesh, MeshQuery) else MeshQuery(mesh)
        self.mesh = self.query.mesh
        self._mass: dict[float, MassProperties] = {}

    @classmethod
    def wrap(cls, obj) -> "EvaluationContext":
        return obj if isinstance(obj, EvaluationContext) else cls(obj)

    def mass_properties(self, density: float) -> MassProperties:
        cached = self._mass.get(density)
        if cached is None:
            cached = self._mass[density] = self.mesh.mass_properties(density)
        return cached


# ------------------------------------------------------------- wrench algebra

def contact_wrench_matrix(
    contacts, friction: float, cone_edges: int, origin=(0.0, 0.0, 0.0), torsion: float = 0.0
) -> np.ndarray:
    """Columns are unit-force friction cone edge wrenches, torques about origin.

    Each contact pushes along the inward normal; its Coulomb cone is sampled
    at ``cone_edges`` evenly spaced tangential directions.  A positive
    ``torsion`` (patch radius, m) appends two pure-squeeze columns per
    contact carrying +-friction*torsion normal torque per unit normal force,
    an inner approximation of the soft-finger contact model.
    """
    origin = np.asarray(origin, float)
    phase = 2.0 * np.pi * np.arange(cone_edges) / cone_edges
    cols = []
    for c in contacts:
        n_out = unit(np.asarray(c.normal, float))
        push = -n_out
        t_u, t_v = tangent_basis(push)
        forces = push + friction * (np.outer(np.cos(phase), t_u) + np.outer(np.sin(phase), t_v))
        forces /= np.linalg.norm(forces, axis=1, keepdims=True)
        arm = np.asarray(c.point, float) - origin
        torques = np.cross(arm, forces)
        cols.append(np.hstack([forces, torques]))
        if torsion > 0.0:
            spin = friction * torsion * n_out
            base = np.concatenate([push, np.cross(arm, push)])
            cols.append(
                np.stack([
                    base + np.concatenate([np.zeros(3), spin]),
                    base - np.concatenate([np.zeros(3), spin]),
                ])
            )
    return np.vstack(cols).T


def _in_cone(w_mat: np.ndarray, wrench: np.ndarray) -> bool:
    """True iff wrench is a nonnegative combination of the columns of w_mat."""
    scale = np.linalg.norm(wrench)
    if scale <= RESIST_TOL:
        return True
    w = wrench / scale
    # Cheap first: a nonnegative least-squares fit whose recomputed residual
    # meets the tolerance is a certificate, no LP needed.  The residual the
    # solver reports is not trusted.
    try:
        lam, _ = nnls(w_mat, w, maxiter=20 * w_mat.shape[1])
        if np.linalg.norm(w_mat @ lam - w) <= RESIST_TOL:
            return True
    except Exception:
        pass
    # Authoritative answer: elastic feasibility program.  The slack pair
    # absorbs any mismatch, so the program is always feasible and its optimum
    # is zero exactly when the wrench lies in the cone.
    k = w_mat.shape[1]
    cost = np.concatenate([np.zeros(k), np.ones(12)])
    a_eq = np.hstack([w_mat, np.eye(6), -np.eye(6)])
    res = linprog(cost, A_eq=a_eq, b_eq=w, method="highs")
    return bool(res.success) and float(res.fun) <= RESIST_TOL


def wrench_resists(
    contacts, wrench, friction: float = 0.5, cone_edges: int = 8, origin=(0.0, 0.0, 0.0)
) -> bool:
    """True iff the contact set can exert the given wrench.

    ``wrench`` is the (force, torque) the contacts must produce, torques
    taken about ``origin``.  Decisions are invariant to positive scaling of
    the wrench.  Solver failure counts as not resisted.
    """
    if not contacts:
        return np.linalg.norm(np.asarray(wrench, float)) <= RESIST_TOL
    w_mat = contact_wrench_matrix(contacts, friction, cone_edges, origin)
    return _in_cone(w_mat, np.asarray(wrench, float))


def _disturbances(mp: MassProperties, params: PhysicsParams):
    """Gravity wrench and the per-shake oscillating wrenches, about the com."""
    grav = mp.mass * params.gravity * unit(np.asarray(params.gravity_dir, float))
    w_grav = np.concatenate([grav, np.zeros(3)])
    jolt = mp.mass * params.shake_accel * unit(np.asarray(params.shake_axis, float))
    w_lin = np.concatenate([jolt, np.zeros(3)])
    spin = mp.inertia @ (params.spin_accel * unit(np.asarray(params.spin_axis, float)))
    w_ang = np.concatenate([np.zeros(3), spin])
    return w_grav, (w_lin, w_ang)


# ------------------------------------------------------------------ evaluation

def evaluate(
    grasp: GraspPose, obj, spec: GripperSpec, params: PhysicsParams | None = None
) -> EvaluationResult:
    """Score one grasp against one object.

    Invalid cases (hand overlaps the object when open, or fewer than two
    fingers of the closing synergy reach contact) score 0.  Otherwise the
    fitness counts consecutive resisted disturbances, translation jolt first.
    """
    ctx = EvaluationContext.wrap(obj)
    if params is None:
        params = PhysicsParams()
    behavior = np.asarray(grasp.position, float).copy()

    frame = grasp.frame()
    palm, caps = open_primitives(spec, frame, grasp.init_joints)
    if intersects_convex(ctx.query, palm) or any(
        intersects_convex(ctx.query, cap) for cap in caps
    ):
        return EvaluationResult(False, 0.0, behavior, grasp.nu, ())

    state = close_fingers(ctx.query, spec, frame, grasp.synergy_id, grasp.init_joints)
    if state.penetrating:
        return EvaluationResult(False, 0.0, behavior, grasp.nu, ())
    fingers = [f for f in spec.synergy_fingers(grasp.synergy_id) if state.contact[f]]
    contacts = tuple(
        Contact(point.copy(), normal.copy(), f)
        for f in fingers
        for point, normal in contact_manifold(
            ctx.query, spec, frame, grasp.init_joints, state, f
        )
    )
    # Validity counts fingers, not points: a flat-resting finger contributes
    # several points but only one finger.
    if len(fingers) < 2:
        return EvaluationResult(False, 0.0, behavior, grasp.nu, contacts)

    mp = ctx.mass_properties(params.density)
    w_mat = contact_wrench_matrix(
        contacts,
        params.friction,
        params.cone_edges,
        origin=mp.center_of_mass,
        torsion=params.torsion_patch,
    )
    w_grav, shakes = _disturbances(mp, params)
    fitness = 0
    for w_shake in shakes:
        if not all(_in_cone(w_mat, -(w_grav + sign * w_shake)) for sign in (1.0, -1.0)):
            break
        fitness += 1
    return EvaluationResult(True, float(fitness), behavior, grasp.nu, contacts)


def evaluate_mdr(
    grasp: GraspPose,
    obj,
    spec: GripperSpec,
    params: PhysicsParams | None = None,
    *,
    trials: int = MDR_TRIALS,
    sigma_pos: float = MDR_SIGMA_POS,
    sigma_rot: float = MDR_SIGMA_ROT,
    sigma_friction: float = MDR_SIGMA_FRICTION,
    seed=0,
) -> EvaluationResult:
    """Sum of ``evaluate`` fitness over independently perturbed trials.

    Each trial displaces the object by a Gaussian offset per axis, rotates it
    about a uniformly random axis through its center of mass by a Gaussian
    angle, and jitters the friction coefficient (clamped positive).  The
    perturbation is applied by moving the grasp and the world-fixed axes into
    the displaced object's coordinates, so the mesh index is built only once.
    With all sigmas zero every trial reduces to the unperturbed evaluation.
    Deterministic for a fixed seed; ``seed`` may be an int or a tuple.
    """
    ctx = EvaluationContext.wrap(obj)
    if params is None:
        params = PhysicsParams()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    com = ctx.mass_properties(params.density).center_of_mass
    pose_mat = matrix_from_quat(np.asarray(grasp.quaternion, float))
    g_dir = unit(np.asarray(params.gravity_dir, float))
    shake_dir = unit(np.asarray(params.shake_axis, float))
    spin_dir = unit(np.asarray(params.spin_axis, float))

    total = 0.0
    any_valid = False
    for _ in range(trials):
        offset = rng.normal(0.0, sigma_pos, 3)
        axis = rng.normal(0.0, 1.0, 3)
        axis = axis / max(np.linalg.norm(axis), 1e-12)
        angle = rng.normal(0.0, sigma_rot)
        d_mu = rng.normal(0.0, sigma_friction)

        rot_inv = rotation_about_axis(axis, angle).T
        trial_grasp = dataclasses.replace(
            grasp,
            position=rot_inv @ (np.asarray(grasp.position, float) - com - offset) + com,
            quaternion=quat_from_matrix(rot_inv @ pose_mat),
        )
        trial_params = dataclasses.replace(
            params,
            friction=max(params.friction + d_mu, 1e-6),
            gravity_dir=tuple(rot_inv @ g_dir),
            shake_axis=tuple(rot_inv @ shake_dir),
            spin_axis=tuple(rot_inv @ spin_dir),
        )
        result = evaluate(trial_grasp, ctx, spec, trial_params)
        total += result.fitness
        any_valid = any_valid or result.valid
    behavior = np.asarray(grasp.position, float).copy()
    return EvaluationResult(any_valid, float(total), behavior, grasp.nu, ())
