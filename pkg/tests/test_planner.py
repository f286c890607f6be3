import numpy as np
import pytest

from pointgrasp.errors import DomainError
from pointgrasp.geometry import GripperModel, make_box
from pointgrasp.planner import (ObjectSpec, PlannerConfig, enumerate_depths,
                                load_grasp_set, plan_object, plan_point,
                                rotation_directions, save_grasp_set)

FAST = PlannerConfig(n_samples=16, n_rotations=6)


def test_enumerate_depths_grid():
    assert enumerate_depths(20, 25, 1) == [20, 21, 22, 23, 24, 25]
    assert enumerate_depths(20, 20) == [20]


def test_enumerate_depths_off_grid_endpoint():
    vals = enumerate_depths(20, 22.5, 1)
    assert vals == [20, 21, 22, 22.5]


def test_enumerate_depths_below_min():
    with pytest.raises(DomainError):
        enumerate_depths(20, 19)


def test_rotation_directions_orthogonal():
    n = np.array([0.0, 0.0, 1.0])
    dirs = rotation_directions(n, 8)
    assert len(dirs) == 8
    for r in dirs:
        assert abs(np.linalg.norm(r) - 1.0) < 1e-12
        assert abs(r @ n) < 1e-12
    # equal angular spacing
    for a, b in zip(dirs, dirs[1:]):
        assert np.clip(a @ b, -1, 1) == pytest.approx(np.cos(2 * np.pi / 8),
                                                      abs=1e-9)


def test_plan_point_cube_face_center(gripper, cube40_spec):
    plan = plan_point(cube40_spec, [0, 0, 20.0], [0, 0, 1.0], gripper, FAST)
    assert not plan.is_negative
    g, q = plan.major
    assert q > 0
    assert g.d >= FAST.d_min
    # supplementary sorted non-increasing and positive
    qs = [s[1] for s in plan.supplementary]
    assert all(x > 0 for x in qs)
    assert all(a >= b for a, b in zip(qs, qs[1:]))
    assert all(q >= x for x in qs)


def test_plan_point_oversized_cube_negative(gripper):
    spec = ObjectSpec.from_mesh("cube80", make_box([80, 80, 80]))
    plan = plan_point(spec, [0, 0, 40.0], [0, 0, 1.0], gripper, FAST)
    assert plan.is_negative


def test_plan_point_flat_slab_negative(gripper):
    # huge plate: every rotation collides before reaching d_min depth
    spec = ObjectSpec.from_mesh("plate", make_box([400.0, 400.0, 8.0]))
    plan = plan_point(spec, [0, 0, 4.0], [0, 0, 1.0], gripper, FAST)
    assert plan.is_negative


def test_plan_object_partition_and_determinism(gripper, cube40_spec):
    a = plan_object(cube40_spec, gripper, FAST, seed=3)
    b = plan_object(cube40_spec, gripper, FAST, seed=3)
    assert len(a.majors) + a.negative_points.shape[0] == FAST.n_samples
    assert len(a.majors) == len(b.majors)
    for (g1, q1), (g2, q2) in zip(a.majors, b.majors):
        assert q1 == q2
        assert np.array_equal(g1.as_row(), g2.as_row())
    assert np.array_equal(a.negative_points, b.negative_points)


def test_plan_object_cube_faces_covered(gripper, cube40_spec):
    cfg = PlannerConfig(n_samples=60, n_rotations=6)
    gs = plan_object(cube40_spec, gripper, cfg, seed=11)
    assert len(gs.majors) > 0
    # majors appear on all six face regions
    seen = set()
    for g, q in gs.majors:
        axis = int(np.argmax(np.abs(g.n)))
        seen.add((axis, float(np.sign(g.n[axis]))))
    assert len(seen) == 6


def test_plan_object_oversized_all_negative(gripper):
    spec = ObjectSpec.from_mesh("cube80", make_box([80, 80, 80]))
    gs = plan_object(spec, gripper, PlannerConfig(n_samples=10,
                                                  n_rotations=4), seed=1)
    assert len(gs.majors) == 0
    assert gs.negative_points.shape[0] == 10


def test_emitted_grasps_satisfy_invariants(gripper, cube40_spec):
    gs = plan_object(cube40_spec, gripper, FAST, seed=3)
    for g, q in gs.majors:
        assert abs(np.linalg.norm(g.n) - 1) < 1e-6
        assert abs(np.linalg.norm(g.r) - 1) < 1e-6
        assert abs(g.n @ g.r) < 1e-6
        assert g.d >= FAST.d_min


def test_opening_monotonicity(cube40_spec):
    """A narrower opening never yields more positive points (cube family)."""
    cfg = PlannerConfig(n_samples=12, n_rotations=4)
    for size in (30.0, 50.0, 70.0):
        spec = ObjectSpec.from_mesh(f"cube{int(size)}",
                                    make_box([size, size, size]))
        counts = []
        for opening in (60.0, 45.0, 32.0):
            grip = GripperModel(max_opening=opening)
            gs = plan_object(spec, grip, cfg, seed=9)
            counts.append(len(gs.majors))
        assert counts[0] >= counts[1] >= counts[2]


def test_grasp_set_roundtrip(tmp_path, gripper, cube40_spec):
    gs = plan_object(cube40_spec, gripper, FAST, seed=3)
    path = tmp_path / "cube.graspset"
    save_grasp_set(gs, path)
    back = load_grasp_set(path)
    assert back.object_name == gs.object_name
    assert back.seed == gs.seed
    assert len(back.majors) == len(gs.majors)
    for (g1, q1), (g2, q2) in zip(gs.majors, back.majors):
        assert q1 == q2
        assert np.array_equal(g1.as_row(), g2.as_row())
    assert len(back.supplementary) == len(gs.supplementary)
    for s1, s2 in zip(gs.supplementary, back.supplementary):
        assert len(s1) == len(s2)
        for (g1, q1), (g2, q2) in zip(s1, s2):
            assert q1 == q2
            assert np.array_equal(g1.as_row(), g2.as_row())
    assert np.array_equal(back.negative_points, gs.negative_points)
    assert np.array_equal(back.negative_normals, gs.negative_normals)
