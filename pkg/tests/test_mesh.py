import numpy as np
import pytest

from pointgrasp.errors import EmptySampleDomain, NonWatertight
from pointgrasp.geometry import (RigidTransform, TriMesh, load_mesh,
                                 make_bowl, make_box, make_cylinder,
                                 make_sphere, mass_properties,
                                 primitive_from_spec, sample_surface,
                                 save_stl)


def test_primitives_watertight_and_outward():
    for mesh in (make_box([40, 40, 40]), make_cylinder(15, 60, 24),
                 make_sphere(25, 2), make_bowl(40, 4, 24, 5)):
        assert mesh.is_watertight()
        assert mesh.signed_volume() > 0
        lens = np.linalg.norm(mesh.face_normals, axis=1)
        assert np.allclose(lens, 1.0, atol=1e-9)


def test_degenerate_triangles_filtered():
    v = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (2, 0, 0)]
    mesh = TriMesh(v, [(0, 1, 2), (0, 1, 3)], orient=False)  # second is flat
    assert mesh.num_triangles == 1


def test_mass_properties_cube():
    props = mass_properties(make_box([40, 40, 40]), density=0.5)
    assert props.mass == pytest.approx(32.0, abs=1e-9)     # 64 cm^3 * 0.5
    assert np.allclose(props.centroid, 0.0, atol=1e-9)


def test_mass_translation_equivariance():
    mesh = make_cylinder(12, 50, 20)
    t = np.array([13.0, -7.0, 21.0])
    moved = mesh.transformed(RigidTransform(np.eye(3), t))
    a = mass_properties(mesh)
    b = mass_properties(moved)
    assert b.mass == pytest.approx(a.mass, rel=1e-12)
    assert np.allclose(b.centroid - a.centroid, t, atol=1e-9)


def test_mass_open_mesh_raises():
    tri = TriMesh([(0, 0, 0), (10, 0, 0), (0, 10, 0)], [(0, 1, 2)],
                  orient=False)
    with pytest.raises(NonWatertight):
        mass_properties(tri)
    props = mass_properties(tri, allow_fallback=True)
    assert not props.watertight


def test_sample_surface_single_triangle():
    tri = TriMesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 2)],
                  orient=False)
    pts, nrm = sample_surface(tri, 100, 0)
    assert pts.shape == (100, 3)
    # all inside the triangle (barycentric) and on its plane
    assert np.allclose(pts[:, 2], 0.0)
    assert np.all(pts[:, 0] >= -1e-12) and np.all(pts[:, 1] >= -1e-12)
    assert np.all(pts[:, 0] + pts[:, 1] <= 1.0 + 1e-12)
    assert np.allclose(nrm, nrm[0])


def test_sample_surface_area_weighted():
    # 40 mm cube: per-face counts within 3 sigma of the uniform multinomial
    cube = make_box([40, 40, 40])
    n = 6000
    pts, nrm = sample_surface(cube, n, 7)
    face_axis = np.argmax(np.abs(nrm), axis=1)
    face_sign = np.sign(nrm[np.arange(n), face_axis])
    counts = np.zeros(6)
    for k in range(n):
        counts[int(face_axis[k]) * 2 + (face_sign[k] > 0)] += 1
    p = 1.0 / 6.0
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 3 * sigma)


def test_sample_surface_empty_domain():
    flat = TriMesh([(0, 0, 0), (1, 0, 0), (2, 0, 0)], [(0, 1, 2)],
                   orient=False)
    assert flat.num_triangles == 0
    with pytest.raises(EmptySampleDomain):
        sample_surface(flat, 10, 0)


def test_sample_surface_deterministic():
    cube = make_box([40, 40, 40])
    a = sample_surface(cube, 500, 42)
    b = sample_surface(cube, 500, 42)
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])


def test_stl_roundtrip(tmp_path):
    mesh = make_sphere(10, 1)
    path = tmp_path / "sphere.stl"
    save_stl(mesh, path)
    back = load_mesh(str(path))
    assert back.num_triangles == mesh.num_triangles
    assert abs(back.signed_volume() - mesh.signed_volume()) < 1e-2


def test_obj_loader(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text(
        "v 0 0 0\nv 10 0 0\nv 10 10 0\nv 0 10 0\nf 1 2 3 4\n")
    mesh = load_mesh(str(path))
    assert mesh.num_triangles == 2       # fan triangulation
    assert mesh.vertices.shape == (4, 3)


def test_ascii_stl_loader(tmp_path):
    path = tmp_path / "tri.stl"
    path.write_text(
        "solid t\nfacet normal 0 0 1\nouter loop\n"
        "vertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\n"
        "endloop\nendfacet\nendsolid t\n")
    mesh = load_mesh(str(path))
    assert mesh.num_triangles == 1


def test_primitive_spec_units():
    spec = {"primitive": "box", "extents": [4, 4, 4], "units": "cm"}
    mesh = primitive_from_spec(spec)
    lo, hi = mesh.aabb
    assert np.allclose(hi - lo, 40.0)


def test_unknown_primitive_rejected():
    with pytest.raises(ValueError):
        primitive_from_spec({"primitive": "torus"})
