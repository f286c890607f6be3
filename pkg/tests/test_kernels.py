"""Backend cross-checks: the numba kernels must agree with the numpy
fallback exactly on discrete outputs and bitwise on intersections."""

import numpy as np
import pytest

from pointgrasp.kernels import build_bvh
from pointgrasp.kernels import numpy_impl as knp

from oracles import random_rotation

numba_impl = pytest.importorskip("pointgrasp.kernels.numba_impl")


@pytest.fixture(scope="module")
def sphere_mesh():
    from pointgrasp.geometry import make_sphere
    m = make_sphere(30.0, 2)
    return m.vertices, m.triangles, build_bvh(m.vertices, m.triangles)


def test_raycast_backends_bitwise(sphere_mesh):
    verts, tris, tree = sphere_mesh
    rng = np.random.default_rng(42)
    orig = rng.normal(scale=80.0, size=(1500, 3))
    dirs = rng.normal(size=(1500, 3))
    t1, h1 = knp.raycast_nearest(orig, dirs, 1e-9, verts, tris, *tree)
    t2, h2 = numba_impl.raycast_nearest(orig, dirs, 1e-9, verts, tris, *tree)
    assert np.array_equal(t1, t2)
    assert np.array_equal(h1, h2)
    assert (h1 >= 0).sum() > 20     # the cast actually hits things


def test_line_extremes_backends(sphere_mesh):
    verts, tris, tree = sphere_mesh
    rng = np.random.default_rng(7)
    for _ in range(300):
        o = rng.normal(scale=20.0, size=3)
        d = rng.normal(size=3)
        lo, hi = sorted(rng.normal(scale=50, size=2))
        a = knp.line_extremes(o, d, lo, hi, verts, tris, *tree)
        b = numba_impl.line_extremes(o, d, lo, hi, verts, tris, *tree)
        assert a == b


def test_box_overlaps_backends(sphere_mesh):
    verts, tris, tree = sphere_mesh
    rng = np.random.default_rng(3)
    hits = 0
    for _ in range(400):
        c = rng.normal(scale=40.0, size=3)
        rot = random_rotation(rng)
        half = rng.uniform(2.0, 25.0, size=3)
        a = knp.box_overlaps(c, rot, half, 0.0, verts, tris, *tree)
        b = numba_impl.box_overlaps(c, rot, half, 0.0, verts, tris, *tree)
        assert a == b
        hits += a
    assert 0 < hits < 400


def test_mesh_overlaps_backends(sphere_mesh):
    verts, tris, tree = sphere_mesh
    from pointgrasp.geometry import make_box
    probe = make_box([20.0, 20.0, 20.0])
    for dx in np.linspace(0.0, 60.0, 25):
        va = probe.vertices + np.array([dx, 0.0, 0.0])
        a = knp.mesh_overlaps(va, probe.triangles, 0.0, verts, tris, *tree)
        b = numba_impl.mesh_overlaps(va, probe.triangles, 0.0, verts, tris,
                                     *tree)
        assert a == b


def test_point_kernels_backends():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(3000, 3))
    f1 = knp.fps(pts, 128, 9)
    f2 = numba_impl.fps(pts, 128, 9)
    assert np.array_equal(f1, f2)
    cent = np.ascontiguousarray(pts[f1])
    i1, c1 = knp.ball_query(pts, cent, 0.35, 24)
    i2, c2 = numba_impl.ball_query(pts, cent, 0.35, 24)
    assert np.array_equal(i1, i2)
    assert np.array_equal(c1, c2)
    n1, d1 = knp.three_nn(pts[:500], cent)
    n2, d2 = numba_impl.three_nn(pts[:500], cent)
    assert np.array_equal(n1, n2)
    assert np.allclose(d1, d2, rtol=0, atol=1e-12)


def test_ball_query_is_sorted_nearest():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(500, 3))
    cent = pts[:10].copy()
    idx, counts = knp.ball_query(pts, cent, 0.5, 8)
    for i in range(10):
        d = np.linalg.norm(pts[idx[i, :counts[i]]] - cent[i], axis=1)
        assert np.all(np.diff(d) >= 0)
        assert np.all(d <= 0.5)
        # centroid itself is always its own nearest neighbor
        assert idx[i, 0] == i
        # no in-radius point was skipped in favor of a farther one
        all_d = np.linalg.norm(pts - cent[i], axis=1)
        within = np.sort(all_d[all_d <= 0.5])
        assert np.allclose(np.sort(d), within[:counts[i]])


def test_fps_spreads_points():
    rng = np.random.default_rng(1)
    pts = rng.uniform(size=(1000, 3))
    sel = knp.fps(pts, 32, 0)
    assert len(set(sel.tolist())) == 32


def test_bvh_covers_all_triangles(sphere_mesh):
    verts, tris, tree = sphere_mesh
    bmin, bmax, left, right, start, count, order = tree
    assert np.array_equal(np.sort(order), np.arange(tris.shape[0]))
    leaf = left < 0
    assert count[leaf].sum() == tris.shape[0]
