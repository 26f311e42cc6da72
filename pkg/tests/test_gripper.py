import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdgrip.errors import ConfigError
from qdgrip.geometry import MeshQuery
from qdgrip.geometry.shapes import box, icosphere
from qdgrip.gripper import (
    PRESETS,
    FingerState,
    GripperFrame,
    GripperSpec,
    approach_distance_max,
    close_fingers,
    contact_manifold,
    finger_capsules,
    get_preset,
    open_primitives,
    palm_box,
    palm_frame_from_approach,
)
from qdgrip.mathutil import angle_between, rotation_about_axis

from conftest import rng


def identity_frame(origin=(0.0, 0.0, 0.0)) -> GripperFrame:
    return GripperFrame(
        np.asarray(origin, float),
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.0]),
        np.array([0.0, 0.0, 1.0]),
    )


# -------------------------------------------------------------------- presets

def test_presets_cover_two_to_five_fingers():
    fingers = {get_preset(name).n_fingers for name in PRESETS}
    assert fingers == {2, 3, 4, 5}


def test_get_preset_unknown_name():
    with pytest.raises(ConfigError):
        get_preset("gripper9000")


def test_panda_is_a_plain_parallel_jaw(panda):
    assert panda.family == "parallel_jaw"
    assert panda.n_fingers == 2
    assert panda.n_synergies == 1
    assert panda.k_free_joints == 0
    assert panda.synergy_fingers(0) == (0, 1)


def test_allegro_synergies():
    spec = get_preset("allegro4")
    assert spec.n_synergies == 4
    assert spec.synergy_fingers(0) == (0, 1)
    assert spec.synergy_fingers(3) == (0, 1, 2, 3)
    with pytest.raises(ConfigError):
        spec.synergy_fingers(4)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_fingers=3),  # parallel jaw must have exactly 2
        dict(synergies=((0,), (1,))),  # parallel jaw takes no synergy choice
        dict(free_joint_ranges=((-1.0, 1.0),)),
        dict(max_aperture=-0.1),
        dict(finger_radius=0.0),
    ],
)
def test_spec_validation_parallel_jaw(kwargs):
    base = dict(
        name="bad",
        family="parallel_jaw",
        n_fingers=2,
        max_aperture=0.08,
        finger_length=0.05,
        finger_radius=0.008,
        palm_size=(0.1, 0.03, 0.04),
    )
    base.update(kwargs)
    with pytest.raises(ConfigError):
        GripperSpec(**base)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family="suction"),
        dict(n_fingers=1),
        dict(synergies=((0, 3),)),  # finger index out of range
        dict(synergies=((0, 0),)),  # duplicate
        dict(free_joint_ranges=((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))),  # > n-1
        dict(free_joint_ranges=((1.0, 1.0),)),
    ],
)
def test_spec_validation_radial(kwargs):
    base = dict(
        name="bad",
        family="radial",
        n_fingers=3,
        max_aperture=0.1,
        finger_length=0.1,
        finger_radius=0.008,
        palm_size=(0.09, 0.04, 0.09),
        synergies=((0, 1, 2),),
    )
    base.update(kwargs)
    with pytest.raises(ConfigError):
        GripperSpec(**base)


# --------------------------------------------------------------------- frames

def test_frame_rejects_bad_axes():
    with pytest.raises(ValueError):
        GripperFrame(np.zeros(3), np.array([1.0, 0, 0]), np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))
    with pytest.raises(ValueError):  # left-handed
        GripperFrame(np.zeros(3), np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, -1.0]))


def test_frame_pose_round_trip():
    r = rng(2)
    rot = rotation_about_axis(r.normal(size=3), 1.234)
    frame = GripperFrame(r.normal(size=3), rot[:, 0], rot[:, 1], rot[:, 2])
    back = GripperFrame.from_pose(frame.origin, frame.quaternion())
    assert np.allclose(back.rotation(), frame.rotation(), atol=1e-12)
    assert np.array_equal(back.origin, frame.origin)


def test_frame_to_world():
    frame = GripperFrame(
        np.array([1.0, 2.0, 3.0]),
        np.array([0.0, 1.0, 0.0]),
        np.array([0.0, 0.0, 1.0]),
        np.array([1.0, 0.0, 0.0]),
    )
    assert np.allclose(frame.to_world(np.array([1.0, 0.0, 0.0])), [1.0, 3.0, 3.0])


# ------------------------------------------------------------ approach frames

@given(
    nu=st.floats(0.0, np.pi / 2),
    xi=st.floats(0.0, 2 * np.pi),
    omega=st.floats(0.0, 2 * np.pi),
    seed=st.integers(0, 2**31 - 1),
)
def test_palm_frame_respects_nu_and_standoff(nu, xi, omega, seed):
    r = rng(seed)
    ref = r.normal(size=3) * 0.02
    n = r.normal(size=3)
    n /= np.linalg.norm(n)
    d = float(r.uniform(0.0, 0.1))
    frame = palm_frame_from_approach(ref, n, d, nu, xi, omega)
    # Gripping direction -y makes angle nu with the inward normal; arccos
    # conditioning near 0 caps the measurable precision around 1e-8.
    assert angle_between(-frame.y_axis, n) == pytest.approx(nu, abs=1e-6)
    assert np.linalg.norm(frame.origin - ref) == pytest.approx(d, abs=1e-12)
    # The origin sits along the approach ray out of the reference point.
    if d > 1e-9:
        assert angle_between(frame.origin - ref, -frame.y_axis) < 1e-6


def test_palm_frame_straight_approach():
    n = np.array([0.0, 0.0, 1.0])
    frame = palm_frame_from_approach(np.zeros(3), n, 0.07, 0.0, 0.0, 0.0)
    assert np.allclose(frame.origin, [0.0, 0.0, 0.07])
    assert np.allclose(frame.y_axis, -n)


def test_palm_frame_omega_rolls_about_approach():
    n = np.array([0.0, 0.0, 1.0])
    f0 = palm_frame_from_approach(np.zeros(3), n, 0.05, 0.3, 1.0, 0.0)
    f1 = palm_frame_from_approach(np.zeros(3), n, 0.05, 0.3, 1.0, np.pi / 2)
    assert np.allclose(f0.y_axis, f1.y_axis, atol=1e-12)
    # A quarter turn about +y sends x to y x x0 = -z0 and z to x0.
    assert np.allclose(f1.x_axis, -f0.z_axis, atol=1e-12)
    assert np.allclose(f1.z_axis, f0.x_axis, atol=1e-12)


def test_approach_distance_max_panda(panda):
    assert approach_distance_max(panda) == pytest.approx(0.08 / 2 + 0.05 / 2)


# -------------------------------------------------------------- hand geometry

def test_open_primitive_counts():
    # parallel jaw: one link per finger; radial: two links per finger
    for name, want in (("panda", 2), ("barrett3", 6), ("allegro4", 8), ("shadow5", 10)):
        spec = get_preset(name)
        joints = tuple(0.0 for _ in spec.free_joint_ranges)
        _, caps = open_primitives(spec, identity_frame(), joints)
        assert len(caps) == want
        assert all(cap.radius == spec.finger_radius for cap in caps)


def test_panda_open_fingers_sit_at_the_aperture(panda):
    frame = identity_frame((0.0, 0.0, 0.1))
    caps = finger_capsules(panda, frame, (), 0, 0.0) + finger_capsules(panda, frame, (), 1, 0.0)
    xs = sorted(float(c.p0[0]) for c in caps)
    assert xs == pytest.approx([-0.04, 0.04])
    for cap in caps:
        assert cap.p0[2] == pytest.approx(0.1)  # jaws move in the frame xy plane
        assert abs(cap.p1[1] - cap.p0[1]) == pytest.approx(panda.finger_length)


def test_panda_closure_moves_fingers_inward(panda):
    caps0 = finger_capsules(panda, identity_frame(), (), 0, 0.0)
    caps1 = finger_capsules(panda, identity_frame(), (), 0, 1.0)
    assert caps0[0].p0[0] == pytest.approx(0.04)
    assert caps1[0].p0[0] == pytest.approx(0.0, abs=1e-12)


def test_palm_box_sits_behind_the_fingers(panda):
    frame = identity_frame()
    b = palm_box(panda, frame)
    assert b.center[1] < -panda.finger_length / 2
    assert np.allclose(b.half_extents, np.array(panda.palm_size) / 2)


def test_radial_capsules_respect_free_joints():
    spec = get_preset("barrett3")
    frame = identity_frame()
    base = finger_capsules(spec, frame, (0.0, 0.0), 1, 0.0)
    steered = finger_capsules(spec, frame, (0.5, 0.0), 1, 0.0)
    assert not np.allclose(base[0].p0, steered[0].p0)
    # finger 0 has no yaw joint and must not move
    f0a = finger_capsules(spec, frame, (0.0, 0.0), 0, 0.0)
    f0b = finger_capsules(spec, frame, (0.5, 0.0), 0, 0.0)
    assert np.allclose(f0a[0].p0, f0b[0].p0)
    assert np.allclose(f0a[1].p1, f0b[1].p1)


# ------------------------------------------------------------------- closures

def test_panda_pinch_on_sphere(sphere_mesh, panda):
    query = MeshQuery(sphere_mesh)
    state = close_fingers(query, panda, identity_frame())
    assert state.n_contacts == 2
    assert not state.penetrating
    r_sphere, r_f = 0.02, panda.finger_radius
    for finger in (0, 1):
        p = state.points[finger]
        assert np.linalg.norm(p) == pytest.approx(r_sphere, abs=5e-4)
        # outward normal, pointing from the surface toward the finger axis
        assert angle_between(state.normals[finger], p) < 0.1
        want_closure = 1.0 - (r_sphere + r_f) / 0.04
        assert state.closures[finger] == pytest.approx(want_closure, abs=0.02)
    # the two jaws land on opposite sides
    assert state.points[0][0] > 0.0 > state.points[1][0]


def test_close_fingers_far_from_object(sphere_mesh, panda):
    query = MeshQuery(sphere_mesh)
    state = close_fingers(query, panda, identity_frame((0.3, 0.0, 0.0)))
    assert state.n_contacts == 0
    assert not state.penetrating
    assert np.all(state.closures == 1.0)


def test_close_fingers_flags_initial_penetration(sphere_mesh, panda):
    # With the origin at (0.036, 0, 0) the -x jaw starts 4 mm from the center
    # axis, well inside the sphere.
    query = MeshQuery(sphere_mesh)
    state = close_fingers(query, panda, identity_frame((0.036, 0.0, 0.0)))
    assert state.penetrating


def test_close_fingers_synergy_subset():
    spec = get_preset("allegro4")
    query = MeshQuery(icosphere(0.02, 2))
    frame = palm_frame_from_approach(
        np.array([0.0, 0.0, 0.02]), np.array([0.0, 0.0, 1.0]), 0.09, 0.0, 0.0, 0.0
    )
    state = close_fingers(query, spec, frame, synergy_id=0)
    # fingers outside synergy (0, 1) stay parked at closure 0
    assert np.all(state.closures[[2, 3]] == 0.0)
    assert not state.contact[2] and not state.contact[3]


def test_radial_hand_wraps_sphere():
    spec = get_preset("barrett3")
    query = MeshQuery(icosphere(0.02, 2))
    frame = palm_frame_from_approach(
        np.array([0.0, 0.0, 0.02]), np.array([0.0, 0.0, 1.0]), 0.01, 0.0, 0.0, 0.0
    )
    state = close_fingers(query, spec, frame, init_joints=(0.0, 0.0))
    assert state.n_contacts == 3
    for finger in range(3):
        assert np.linalg.norm(state.points[finger]) == pytest.approx(0.02, abs=1e-3)


# ------------------------------------------------------------ contact manifold

def test_manifold_single_point_on_sphere(sphere_mesh, panda):
    query = MeshQuery(sphere_mesh)
    state = close_fingers(query, panda, identity_frame())
    pairs = contact_manifold(query, panda, identity_frame(), (), state, 0)
    assert len(pairs) == 1
    point, normal = pairs[0]
    assert np.array_equal(point, state.points[0])
    assert np.array_equal(normal, state.normals[0])


def test_manifold_spreads_along_a_flat_face(panda):
    """A jaw flat against a box face touches along the whole finger line; the
    probed link ends must stretch the manifold across that line, whether the
    sweep's nominal contact landed mid-link or at an end."""
    mesh = box(0.04, 0.06, 0.03)
    query = MeshQuery(mesh)
    state = close_fingers(query, panda, identity_frame())
    assert state.n_contacts == 2
    pairs = contact_manifold(query, panda, identity_frame(), (), state, 0)
    assert 2 <= len(pairs) <= 3
    pts = np.array([p for p, _ in pairs])
    assert np.allclose(pts[:, 0], 0.02, atol=1e-4)  # all on the +x face
    assert np.ptp(pts[:, 1]) == pytest.approx(panda.finger_length, abs=2e-3)
    for _, n in pairs:
        assert np.allclose(n, [1.0, 0.0, 0.0], atol=0.05)


def test_manifold_empty_without_contact(sphere_mesh, panda):
    query = MeshQuery(sphere_mesh)
    state = FingerState(
        closures=np.ones(2),
        contact=np.zeros(2, dtype=bool),
        points=np.zeros((2, 3)),
        normals=np.zeros((2, 3)),
        links=np.full(2, -1),
    )
    assert contact_manifold(query, panda, identity_frame(), (), state, 0) == []
