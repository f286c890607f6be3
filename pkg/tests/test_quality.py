import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointgrasp.errors import DomainError
from pointgrasp.geometry import (GripperModel, RigidTransform, make_box,
                                 make_cylinder, make_sphere, sample_surface)
from pointgrasp.geometry.transforms import (orthonormal_tangents,
                                            rotate_about_axis)
from pointgrasp.grasp import Grasp
from pointgrasp.quality import (Contact, QualityConfig, combined_metric,
                                ferrari_canny, find_contacts, friction_cone,
                                grasp_quality, grasp_wrenches,
                                primitive_wrenches, wrench_debug_dump)

from oracles import lp_force_closure, random_rotation, support_function_quality


def _grasp(p, n, r, d):
    return Grasp(np.asarray(p, float), np.asarray(n, float),
                 np.asarray(r, float), float(d))


# ---------------------------------------------------------------------------
# contacts

def test_cube_contacts_on_opposed_faces(gripper, cube40):
    g = _grasp([0, 0, 20], [0, 0, 1], [1, 0, 0], 25.0)
    lo, hi = find_contacts(g, cube40, gripper, 0.2)
    assert lo.position[0] == pytest.approx(-20.0, abs=1e-9)
    assert hi.position[0] == pytest.approx(20.0, abs=1e-9)
    assert np.allclose(lo.inward_normal, [1, 0, 0], atol=1e-12)
    assert np.allclose(hi.inward_normal, [-1, 0, 0], atol=1e-12)


def test_contacts_free_space(gripper, cube40):
    g = _grasp([500, 0, 0], [0, 0, 1], [1, 0, 0], 10.0)
    assert find_contacts(g, cube40, gripper, 0.2) is None


def test_contacts_width_exceeds_opening(gripper, cube80):
    g = _grasp([0, 0, 40], [0, 0, 1], [1, 0, 0], 25.0)
    assert find_contacts(g, cube80, gripper, 0.2) is None


# ---------------------------------------------------------------------------
# friction cones

def test_cone_frictionless_collapses():
    c = Contact([0, 0, 0], [0, 0, 1], 0.0)
    assert np.allclose(friction_cone(c, 8), [0, 0, 1])


def test_cone_angles_exact():
    c = Contact([0, 0, 0], [0, 0, 1], 0.2)
    cone = friction_cone(c, 8)
    angles = np.arccos(np.clip(cone @ np.array([0, 0, 1.0]), -1, 1))
    assert np.allclose(angles, np.arctan(0.2), atol=1e-9)
    assert np.allclose(np.linalg.norm(cone, axis=1), 1.0, atol=1e-12)


def test_cone_mean_parallel_to_normal():
    n = np.array([0.3, -0.5, 0.81])
    n /= np.linalg.norm(n)
    cone = friction_cone(Contact([0, 0, 0], n, 0.4), 8)
    mean = cone.mean(axis=0)
    assert np.allclose(np.cross(mean / np.linalg.norm(mean), n), 0,
                       atol=1e-12)


# ---------------------------------------------------------------------------
# primitive wrenches

def _pair(mu=0.2):
    return (Contact([20, 0, -5], [-1, 0, 0], mu),
            Contact([-20, 0, -5], [1, 0, 0], mu))


def test_wrench_count_two_contacts():
    w = primitive_wrenches(_pair(), np.zeros(3), QualityConfig(), 0.02)
    assert w.shape == (16, 6)


def test_wrench_zero_torque_at_origin_contact():
    c = Contact([5, 6, 7], [0, 0, 1], 0.3)
    w = primitive_wrenches((c,), np.array([5.0, 6.0, 7.0]),
                           QualityConfig(), 1.0)
    assert np.allclose(w[:, 3:], 0.0, atol=1e-15)


def test_wrench_translation_invariance():
    t = np.array([3.0, -11.0, 4.0])
    a = primitive_wrenches(_pair(), np.zeros(3), QualityConfig(), 0.05)
    moved = tuple(Contact(c.position + t, c.inward_normal, c.mu)
                  for c in _pair())
    b = primitive_wrenches(moved, t, QualityConfig(), 0.05)
    assert np.allclose(a, b, atol=1e-12)


# ---------------------------------------------------------------------------
# ferrari_canny

def test_rank_deficient_is_zero():
    # all forces +z, no torque diversity
    w = np.zeros((12, 6))
    w[:, 2] = 1.0
    w[:, 3] = np.linspace(-1, 1, 12)
    assert ferrari_canny(w) == 0.0


def test_colinear_two_point_contacts_are_rank_deficient():
    # moment about the contact line is unresistable for point contacts
    w = primitive_wrenches(_pair(), np.zeros(3), QualityConfig(), 0.02)
    assert ferrari_canny(w) == 0.0
    assert not lp_force_closure(w)


def test_sphere_antipodal_positive_and_near_oracle(gripper, sphere25):
    g = _grasp([0, 0, 25], [0, 0, 1], [1, 0, 0], 25.0)
    w = grasp_wrenches(g, sphere25, np.zeros(3), 0.2, gripper)
    q = ferrari_canny(w)
    assert q > 0
    oracle = support_function_quality(w, n_dirs=20000, seed=1)
    assert abs(q - oracle) / q <= 0.05


def test_hull_homothety():
    g = _grasp([0, 0, 20], [0, 0, 1], [1, 0, 0], 25.0)
    cube = make_box([40, 40, 40])
    w = grasp_wrenches(g, cube, np.zeros(3), 0.2, GripperModel())
    q1 = ferrari_canny(w)
    assert 0 < q1 < 0.5
    q2 = ferrari_canny(0.5 * w)
    assert q2 == pytest.approx(0.5 * q1, rel=1e-9)


# ---------------------------------------------------------------------------
# combined metric

def test_combined_metric_paper_cases():
    assert combined_metric(0.0) == (0, 0.0)
    assert combined_metric(0.03) == (1, 0.03)


def test_combined_metric_negative_rejected():
    with pytest.raises(DomainError):
        combined_metric(-0.1)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
def test_combined_metric_piecewise(q):
    q_b, q_c = combined_metric(q)
    assert q_b == (1 if q > 0 else 0)
    assert q_c == q_b * q


# ---------------------------------------------------------------------------
# grasp_quality

def test_free_space_quality_zero(gripper, cube40):
    g = _grasp([500, 0, 0], [0, 0, 1], [1, 0, 0], 10.0)
    res = grasp_quality(g, cube40, np.zeros(3), 0.2, gripper)
    assert (res.q_fc, res.q_b, res.q_c) == (0.0, 0, 0.0)


def test_cube_antipodal_is_force_closure(gripper, cube40):
    g = _grasp([0, 0, 20], [0, 0, 1], [1, 0, 0], 25.0)
    res = grasp_quality(g, cube40, np.zeros(3), 0.2, gripper)
    assert res.q_b == 1
    assert res.q_c == res.q_fc > 0


def test_single_contact_never_closure(gripper):
    # grasp the rim of a large thin wall: one finger side has no surface
    wall = make_box([200.0, 4.0, 100.0])
    g = _grasp([90.0, 2.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], 10.0)
    res = grasp_quality(g, wall, np.zeros(3), 0.2, GripperModel())
    assert res.q_fc == 0.0


def _random_two_finger_cases(n_cases, seed=2024):
    """Randomized grasps over primitive meshes with valid finger contacts."""
    rng = np.random.default_rng(seed)
    grip = GripperModel()
    meshes = [make_box([40, 40, 40]), make_sphere(25, 3),
              make_cylinder(14, 50, 24), make_box([55, 25, 18])]
    cases = []
    while len(cases) < n_cases:
        mesh = meshes[int(rng.integers(len(meshes)))]
        pts, nrms = sample_surface(mesh, 1, rng)
        t1, _ = orthonormal_tangents(nrms[0])
        r = rotate_about_axis(t1, nrms[0], rng.uniform(0, 2 * np.pi))
        g = Grasp(pts[0], nrms[0], r, float(rng.uniform(2.0, 38.0)))
        mu = float(rng.uniform(0.1, 0.7))
        w = grasp_wrenches(g, mesh, np.zeros(3), mu, grip)
        if w is not None:
            cases.append(w)
    return cases


def test_force_closure_sign_matches_lp_oracle():
    """>=100 randomized two-finger grasp wrench sets: hull sign == LP."""
    positives = 0
    for w in _random_two_finger_cases(100):
        hull_positive = ferrari_canny(w) > 0
        assert hull_positive == lp_force_closure(w)
        positives += hull_positive
    assert positives > 10, "need both classes represented"


def test_quality_value_matches_support_oracle():
    checked = 0
    for i, w in enumerate(_random_two_finger_cases(60, seed=77)):
        q = ferrari_canny(w)
        if q <= 0:
            continue
        oracle = support_function_quality(w, n_dirs=15000, seed=i)
        assert abs(q - oracle) / q <= 0.05
        checked += 1
    assert checked >= 10


def test_rigid_invariance(gripper, cube40):
    rng = np.random.default_rng(8)
    g = _grasp([0, 0, 20], [0, 0, 1], [1, 0, 0], 27.0)
    base = grasp_quality(g, cube40, np.zeros(3), 0.2, gripper)
    for _ in range(10):
        tf = RigidTransform(random_rotation(rng), rng.uniform(-50, 50, 3))
        moved_mesh = cube40.transformed(tf)
        res = grasp_quality(g.transformed(tf), moved_mesh,
                            tf.apply(np.zeros(3)), 0.2, gripper)
        assert res.q_fc == pytest.approx(base.q_fc, abs=1e-9)


def test_wrench_debug_dump(gripper, cube40):
    g = _grasp([0, 0, 20], [0, 0, 1], [1, 0, 0], 25.0)
    w = grasp_wrenches(g, cube40, np.zeros(3), 0.2, gripper)
    info = wrench_debug_dump(w)
    assert info["q_fc"] > 0
    assert len(info["facets"]) > 0
    assert len(info["wrenches"]) == w.shape[0]
