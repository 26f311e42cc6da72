"""Gripper geometry: frames, hand models, and kinematic finger closure.

Conventions. The gripper frame origin is the grasp center between the
fingers, halfway along their span, so a pinched object ends up around the
origin and the jaws straddle whatever the frame is placed on. y points from
the palm toward the object (the gripping direction), the palm plane is
spanned by x and z, and the triad is right-handed (x cross y = z). Parallel
jaws travel along +-x; radial fingers are mounted on a circle around y and
sweep two-link arcs toward the axis.

Closure is purely kinematic: each closing finger advances in small steps
until it first touches the mesh or reaches its joint limit, with the contact
instant refined by bisection. Nothing moves the object.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import Box, Capsule, MeshQuery
from .geometry.distance import closest_point_segment_triangle, segment_triangle_distance
from .mathutil import matrix_from_quat, quat_from_matrix, tangent_basis, unit

TRANSLATION_STEP = 1e-3  # m per closure step, parallel jaws
ROTATION_STEP = np.deg2rad(0.5)  # rad per closure step, radial fingers
REFINE_TRAVEL = 1e-5  # m, bisection stop for the contact instant
_RADIAL_MOUNT_DEPTH = 0.85  # finger mount plane, in finger lengths behind the origin


@dataclass(frozen=True)
class GripperFrame:
    origin: np.ndarray
    x_axis: np.ndarray
    y_axis: np.ndarray
    z_axis: np.ndarray

    def __post_init__(self):
        r = self.rotation()
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9):
            raise ValueError("gripper frame axes are not orthonormal")
        if np.linalg.det(r) < 0.0:
            raise ValueError("gripper frame is left-handed")

    def rotation(self) -> np.ndarray:
        """Rotation matrix with columns (x_axis, y_axis, z_axis)."""
        return np.column_stack([self.x_axis, self.y_axis, self.z_axis])

    def quaternion(self) -> np.ndarray:
        """Orientation as (x, y, z, w)."""
        return quat_from_matrix(self.rotation())

    def to_world(self, local: np.ndarray) -> np.ndarray:
        return self.origin + np.asarray(local, float) @ self.rotation().T

    @classmethod
    def from_pose(cls, position: np.ndarray, quaternion: np.ndarray) -> "GripperFrame":
        r = matrix_from_quat(quaternion)
        return cls(np.asarray(position, float), r[:, 0].copy(), r[:, 1].copy(), r[:, 2].copy())


@dataclass(frozen=True)
class GraspPose:
    """A grasp: frame pose plus the hand-internal degrees of freedom.

    ``nu`` is a diagnostic carried by approach-family decodes (the angle
    between the surface normal and the approach direction); it does not
    affect evaluation.
    """

    position: np.ndarray
    quaternion: np.ndarray  # (x, y, z, w)
    synergy_id: int = 0
    init_joints: tuple[float, ...] = ()
    nu: float | None = None

    def frame(self) -> GripperFrame:
        return GripperFrame.from_pose(self.position, self.quaternion)


@dataclass(frozen=True)
class GripperSpec:
    """Geometry and joint layout of one hand model.

    ``synergies`` lists the finger subsets a grasp may close; ``free_joint_ranges``
    gives one (lo, hi) radian interval per mount yaw joint, where free joint j
    steers the mount direction of finger j + 1 (finger 0 never yaws).
    """

    name: str
    family: str  # "parallel_jaw" | "radial"
    n_fingers: int
    max_aperture: float
    finger_length: float
    finger_radius: float
    palm_size: tuple[float, float, float]  # full extents along x, y, z
    synergies: tuple[tuple[int, ...], ...] = ((),)
    free_joint_ranges: tuple[tuple[float, float], ...] = ()
    mount_radius: float = 0.025
    curl_open: float = -0.2  # rad, proximal joint at closure 0 (splayed out)
    curl_closed: float = 1.5  # rad, proximal joint at closure 1
    distal_coupling: float = 0.75  # distal angle = coupling * proximal

    def __post_init__(self):
        if self.family not in ("parallel_jaw", "radial"):
            raise ConfigError(f"unknown gripper family {self.family!r}")
        if self.family == "parallel_jaw":
            if self.n_fingers != 2:
                raise ConfigError("parallel_jaw grippers have exactly 2 fingers")
            if self.n_synergies != 1 or self.k_free_joints != 0:
                raise ConfigError("parallel_jaw grippers take no synergy or free joints")
        if self.n_fingers < 2:
            raise ConfigError("a gripper needs at least 2 fingers")
        if min(self.max_aperture, self.finger_length, self.finger_radius) <= 0.0:
            raise ConfigError("gripper dimensions must be positive")
        if any(min(s) < 0 or max(s) >= self.n_fingers for s in self.synergies if s):
            raise ConfigError("synergy names a finger index out of range")
        if any(len(set(s)) != len(s) for s in self.synergies):
            raise ConfigError("synergy lists a finger twice")
        if self.k_free_joints > self.n_fingers - 1:
            raise ConfigError("more free joints than steerable fingers")
        if any(lo >= hi for lo, hi in self.free_joint_ranges):
            raise ConfigError("free joint range must satisfy lo < hi")

    @property
    def n_synergies(self) -> int:
        return len(self.synergies)

    @property
    def k_free_joints(self) -> int:
        return len(self.free_joint_ranges)

    def synergy_fingers(self, synergy_id: int) -> tuple[int, ...]:
        if not 0 <= synergy_id < self.n_synergies:
            raise ConfigError(f"synergy id {synergy_id} out of range")
        s = self.synergies[synergy_id]
        return s if s else tuple(range(self.n_fingers))

    # Two-link split of the total finger length, radial family.
    @property
    def _l1(self) -> float:
        return 0.55 * self.finger_length

    @property
    def _l2(self) -> float:
        return 0.45 * self.finger_length


@dataclass
class FingerState:
    """Outcome of a closure: per-finger closure fraction and contact data."""

    closures: np.ndarray  # (n,) in [0, 1]
    contact: np.ndarray  # (n,) bool
    points: np.ndarray  # (n, 3) contact point on the object surface
    normals: np.ndarray  # (n, 3) outward surface normal at the contact
    links: np.ndarray  # (n,) contacting link index, -1 without contact
    penetrating: bool = False  # a finger already intersected the mesh at closure 0

    @property
    def n_contacts(self) -> int:
        return int(self.contact.sum())


# --------------------------------------------------------------------- presets

def _parallel(name: str, aperture: float, finger_length: float, finger_radius: float,
              palm: tuple[float, float, float]) -> GripperSpec:
    return GripperSpec(
        name=name,
        family="parallel_jaw",
        n_fingers=2,
        max_aperture=aperture,
        finger_length=finger_length,
        finger_radius=finger_radius,
        palm_size=palm,
    )


_SPREAD = (-np.pi / 2, np.pi / 2)

PRESETS: dict[str, GripperSpec] = {
    "panda": _parallel("panda", 0.08, 0.05, 0.008, (0.11, 0.03, 0.04)),
    "barrett3": GripperSpec(
        name="barrett3",
        family="radial",
        n_fingers=3,
        max_aperture=0.12,
        finger_length=0.115,
        finger_radius=0.009,
        palm_size=(0.09, 0.04, 0.09),
        synergies=((0, 1, 2),),
        free_joint_ranges=(_SPREAD, _SPREAD),
        mount_radius=0.028,
    ),
    "allegro4": GripperSpec(
        name="allegro4",
        family="radial",
        n_fingers=4,
        max_aperture=0.11,
        finger_length=0.095,
        finger_radius=0.008,
        palm_size=(0.09, 0.035, 0.09),
        synergies=((0, 1), (0, 2), (0, 1, 2), (0, 1, 2, 3)),
        mount_radius=0.03,
    ),
    "shadow5": GripperSpec(
        name="shadow5",
        family="radial",
        n_fingers=5,
        max_aperture=0.10,
        finger_length=0.085,
        finger_radius=0.007,
        palm_size=(0.09, 0.03, 0.09),
        synergies=((0, 1), (0, 2), (0, 1, 2), (0, 1, 2, 3, 4)),
        mount_radius=0.032,
    ),
}


def get_preset(name: str) -> GripperSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown gripper preset {name!r}; options: {sorted(PRESETS)}") from None


def approach_distance_max(spec: GripperSpec) -> float:
    """Largest stand-off distance d a genome can encode for this hand."""
    return spec.max_aperture / 2.0 + 0.5 * spec.finger_length


# ------------------------------------------------------------ frame placement

def palm_frame_from_approach(
    ref_point: np.ndarray,
    surface_normal: np.ndarray,
    d: float,
    nu: float,
    xi: float,
    omega: float,
) -> GripperFrame:
    """Place the palm frame for an approach toward a surface point.

    The approach direction makes angle ``nu`` with the outward normal, with
    ``xi`` choosing the direction around the cone and ``omega`` the wrist
    roll about the approach axis. The origin stands off ``d`` meters from
    the reference point, against the gripping direction.
    """
    n = unit(surface_normal)
    t1, t2 = tangent_basis(n)
    radial = np.cos(xi) * t1 + np.sin(xi) * t2
    away = np.cos(nu) * n + np.sin(nu) * radial  # from surface toward gripper
    y = -away
    ref_x = -np.sin(nu) * n + np.cos(nu) * radial  # d(away)/d(nu), unit, ⟂ y
    x = np.cos(omega) * ref_x + np.sin(omega) * np.cross(y, ref_x)
    z = np.cross(x, y)
    return GripperFrame(np.asarray(ref_point, float) + d * away, x, y, z)


# ------------------------------------------------------- hand geometry builders

def palm_box(spec: GripperSpec, frame: GripperFrame) -> Box:
    sx, sy, sz = spec.palm_size
    if spec.family == "parallel_jaw":
        back = spec.finger_length / 2.0 + sy / 2.0
    else:
        back = _RADIAL_MOUNT_DEPTH * spec.finger_length + sy / 2.0
    return Box(
        center=frame.origin - back * frame.y_axis,
        rotation=frame.rotation(),
        half_extents=np.array([sx, sy, sz]) / 2.0,
    )


def _mount_dirs(spec: GripperSpec, init_joints: tuple[float, ...]) -> np.ndarray:
    """Local radial mount direction of each finger in the palm plane (x, z)."""
    base = 2.0 * np.pi * np.arange(spec.n_fingers) / spec.n_fingers
    yaw = np.zeros(spec.n_fingers)
    for j, angle in enumerate(init_joints):
        yaw[j + 1] = angle
    ang = base + yaw
    return np.stack([np.cos(ang), np.zeros_like(ang), np.sin(ang)], axis=1)


def _finger_segments(
    spec: GripperSpec,
    frame: GripperFrame,
    init_joints: tuple[float, ...],
    finger: int,
    closures: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Capsule axis endpoints of one finger at each closure value.

    Returns (p0, p1), each shaped (len(closures), links, 3) in world space.
    """
    closures = np.asarray(closures, float)
    r = frame.rotation()
    if spec.family == "parallel_jaw":
        side = 1.0 if finger == 0 else -1.0
        offset = side * (1.0 - closures) * spec.max_aperture / 2.0
        half = spec.finger_length / 2.0
        base = np.stack([offset, np.full_like(offset, -half), np.zeros_like(offset)], axis=1)
        tip = np.stack([offset, np.full_like(offset, half), np.zeros_like(offset)], axis=1)
        p0 = frame.origin + base @ r.T
        p1 = frame.origin + tip @ r.T
        return p0[:, None, :], p1[:, None, :]

    e = _mount_dirs(spec, init_joints)[finger]
    y_local = np.array([0.0, 1.0, 0.0])
    mount_y = -_RADIAL_MOUNT_DEPTH * spec.finger_length
    base = spec.mount_radius * e + np.array([0.0, mount_y, 0.0])
    q1 = spec.curl_open + closures * (spec.curl_closed - spec.curl_open)
    q2 = q1 * (1.0 + spec.distal_coupling)
    d1 = np.cos(q1)[:, None] * y_local - np.sin(q1)[:, None] * e
    d2 = np.cos(q2)[:, None] * y_local - np.sin(q2)[:, None] * e
    knuckle = base + spec._l1 * d1
    tip = knuckle + spec._l2 * d2
    p0 = np.stack([np.broadcast_to(base, knuckle.shape), knuckle], axis=1)
    p1 = np.stack([knuckle, tip], axis=1)
    return p0 @ r.T + frame.origin, p1 @ r.T + frame.origin


def finger_capsules(
    spec: GripperSpec,
    frame: GripperFrame,
    init_joints: tuple[float, ...],
    finger: int,
    closure: float,
) -> list[Capsule]:
    """World-space capsules of one finger at the given closure in [0, 1]."""
    p0, p1 = _finger_segments(spec, frame, init_joints, finger, np.array([closure]))
    return [Capsule(p0[0, j], p1[0, j], spec.finger_radius) for j in range(p0.shape[1])]


def open_primitives(
    spec: GripperSpec, frame: GripperFrame, init_joints: tuple[float, ...] = ()
) -> tuple[Box, list[Capsule]]:
    """Palm box and all finger capsules at the fully open configuration."""
    caps: list[Capsule] = []
    for finger in range(spec.n_fingers):
        caps.extend(finger_capsules(spec, frame, init_joints, finger, 0.0))
    return palm_box(spec, frame), caps


# ---------------------------------------------------------------- closure sweep

def close_fingers(
    query: MeshQuery,
    spec: GripperSpec,
    frame: GripperFrame,
    synergy_id: int = 0,
    init_joints: tuple[float, ...] = (),
    *,
    step: float | None = None,
    refine: float = REFINE_TRAVEL,
) -> FingerState:
    """Close the synergy's fingers toward the object, one finger at a time.

    Each closing finger advances independently until its surface first meets
    the mesh, then the contact instant is bisected down to ``refine`` meters
    of travel. Fingers outside the synergy stay at closure 0.
    """
    n = spec.n_fingers
    state = FingerState(
        closures=np.zeros(n),
        contact=np.zeros(n, dtype=bool),
        points=np.zeros((n, 3)),
        normals=np.zeros((n, 3)),
        links=np.full(n, -1),
    )
    if spec.family == "parallel_jaw":
        travel = spec.max_aperture / 2.0
        dc = (step or TRANSLATION_STEP) / travel
    else:
        sweep = abs(spec.curl_closed - spec.curl_open)
        # Distal coupling makes the fingertip the fastest-moving point.
        travel = sweep * (spec._l1 + spec._l2 * (1.0 + spec.distal_coupling))
        dc = (step or ROTATION_STEP) / sweep
    n_steps = max(1, int(np.ceil(1.0 / dc)))
    grid = np.minimum(np.arange(n_steps + 1) * dc, 1.0)
    grid[-1] = 1.0

    step_len = dc * travel  # worst-case surface motion per grid step, m
    r_f = spec.finger_radius
    cutoff = r_f + step_len + 1e-6  # below this an exact distance is required

    for finger in spec.synergy_fingers(synergy_id):
        if spec.family == "parallel_jaw":
            # Parallel-jaw endpoints are affine in closure; lerping the two
            # extremes skips the full kinematics in the hot path.
            ends = _finger_segments(spec, frame, init_joints, finger, np.array([0.0, 1.0]))

            def segments_at(closure: float) -> tuple[np.ndarray, np.ndarray]:
                return tuple(e[0] + closure * (e[1] - e[0]) for e in ends)
        else:

            def segments_at(closure: float) -> tuple[np.ndarray, np.ndarray]:
                p0, p1 = _finger_segments(spec, frame, init_joints, finger, np.array([closure]))
                return p0[0], p1[0]

        if spec.family == "parallel_jaw":
            pts = np.concatenate([e.reshape(-1, 3) for e in ends])
            lo = pts.min(axis=0)
            hi = pts.max(axis=0)
        else:
            # Every finger point stays within one finger length of its mount.
            base = segments_at(0.0)[0][0]
            lo = base - spec.finger_length
            hi = base + spec.finger_length
        # Pad by one step of travel so bisection stays inside the culled set.
        pad = r_f + step_len + 1e-4
        idx = query.candidates_in_aabb(lo - pad, hi + pad)
        if len(idx) == 0:
            state.closures[finger] = 1.0
            continue

        # Sweep the grid front to back, but skip steps no triangle can reach:
        # a distance d at step k rules out contact before k + (d - r)/step_len.
        # The one-step lookahead in the eligibility test keeps d_hit exact for
        # everything the refinement's pair list may need.
        earliest = np.zeros(len(idx))
        k = 0
        k_hit = -1
        d_hit = None
        idx_hit = None
        while k < len(grid):
            elig = earliest <= k + 1.0 + 1e-9
            sub = idx[elig]
            p0k, p1k = segments_at(grid[k])
            d_mat = query.segment_distance_matrix_pruned(p0k, p1k, sub, cutoff)
            d = d_mat.min(axis=0)
            if (d <= r_f).any():
                k_hit, d_hit, idx_hit = k, d_mat, sub
                break
            earliest[elig] = k + (d - r_f) / step_len
            k = max(k + 1, int(np.ceil(earliest.min() - 1e-9)))
        if k_hit == 0:
            state.penetrating = True
            return state
        if k_hit < 0:
            state.closures[finger] = 1.0
            continue

        # Refine by bisection over (link, triangle) pairs, dropping pairs the
        # Lipschitz bound proves unreachable as the bracket halves.
        link_p, tri_p = np.nonzero(d_hit <= r_f + step_len + 1e-6)
        tri_p = idx_hit[tri_p]
        c_lo, c_hi = grid[k_hit - 1], grid[k_hit]

        def pair_distances(closure: float) -> np.ndarray:
            p0c, p1c = segments_at(closure)
            return segment_triangle_distance(
                p0c[link_p], p1c[link_p],
                query.a[tri_p], query.b[tri_p], query.c[tri_p],
                tri_normal=query.tri_n[tri_p],
            )

        while (c_hi - c_lo) * travel > refine:
            mid = 0.5 * (c_lo + c_hi)
            half = 0.5 * (c_hi - c_lo)
            d_p = pair_distances(mid)
            if (d_p <= r_f).any():
                c_hi = mid
            else:
                c_lo = mid
            keep = d_p <= r_f + half * travel + 1e-9
            link_p, tri_p = link_p[keep], tri_p[keep]

        d_p = pair_distances(c_hi)
        best = int(d_p.argmin())
        link, tri = int(link_p[best]), int(tri_p[best])
        cap = finger_capsules(spec, frame, init_joints, finger, c_hi)[link]
        on_seg, on_tri, d = closest_point_segment_triangle(
            cap.p0, cap.p1, query.a[tri], query.b[tri], query.c[tri]
        )
        state.closures[finger] = float(c_hi)
        state.contact[finger] = True
        state.links[finger] = link
        state.points[finger] = on_tri
        # Collision normal: from the surface point toward the capsule axis.
        # Falls back to the face normal when the pair is degenerate.
        if d > 1e-9:
            state.normals[finger] = (on_seg - on_tri) / d
        else:
            state.normals[finger] = query.mesh.normals[tri]
    return state


def contact_manifold(
    query: MeshQuery,
    spec: GripperSpec,
    frame: GripperFrame,
    init_joints: tuple[float, ...],
    state: FingerState,
    finger: int,
    spread_tol: float = 2.5e-3,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Contact points of one closed finger: (surface point, outward normal).

    A capsule resting along a flat region touches on a line, not a point; a
    single-point model would leave such grasps unable to resist the couple of
    a shear pinch that any impulse-based simulator resolves easily.  The ends
    of the touching link are therefore probed, and each end within
    ``spread_tol`` of the surface contributes a second contact point.  The
    default tolerance is a pad-compliance allowance: a finger pressed at one
    point settles until its end meets the surface, provided the gap is a few
    degrees' rotation away.
    """
    if not state.contact[finger]:
        return []
    pairs = [(state.points[finger], state.normals[finger])]
    cap = finger_capsules(spec, frame, init_joints, finger, state.closures[finger])[
        int(state.links[finger])
    ]
    reach = cap.radius + spread_tol
    for end in (cap.p0, cap.p1):
        idx = query.candidates_in_aabb(end - reach, end + reach)
        if len(idx) == 0:
            continue
        tri, on_tri, _, d = query.segment_contact(end, end, idx)
        if d > reach:
            continue
        if any(np.linalg.norm(on_tri - p) < 1e-3 for p, _ in pairs):
            continue
        normal = (end - on_tri) / d if d > 1e-9 else query.mesh.normals[tri]
        pairs.append((on_tri, normal))
    return pairs
