"""Quasi-static multi-object scene composition in the invisible totebox.

Objects are dropped deterministically instead of dynamically simulated:
a random stable orientation (convex-hull face whose support polygon
contains the centroid projection), a random yaw and XY inside the totebox
footprint, then lowered along -z to first contact with the ground plane
or previously placed objects.  A post-drop lift guarantees pairwise
penetration stays within tolerance.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from ..errors import PlacementFailure
from ..geometry.mesh import MeshSet, TriMesh, sample_surface
from ..geometry.transforms import RigidTransform

GROUND_EXTENT = 600.0
PENETRATION_TOL = 0.5       # mm, SceneSpec invariant
CONTACT_MARGIN = 0.2        # mm, overlap depth treated as touching
LIFT_STEP = 0.1             # mm
SUPPORT_MARGIN = 1e-6


def ground_mesh(extent=GROUND_EXTENT):
    """Two-triangle ground plane at z=0 (normals +z)."""
    e = extent
    v = [(-e, -e, 0.0), (e, -e, 0.0), (e, e, 0.0), (-e, e, 0.0)]
    return TriMesh(v, [(0, 1, 2), (0, 2, 3)], orient=False)


def _rotation_to_minus_z(normal):
    """Rotation matrix carrying the unit normal onto (0,0,-1)."""
    f = np.asarray(normal, dtype=np.float64)
    tgt = np.array([0.0, 0.0, -1.0])
    c = float(f @ tgt)
    if c > 1.0 - 1e-12:
        return np.eye(3)
    if c < -1.0 + 1e-12:
        return np.diag([1.0, -1.0, -1.0])
    axis = np.cross(f, tgt)
    s = np.linalg.norm(axis)
    axis = axis / s
    k = np.array([[0.0, -axis[2], axis[1]],
                  [axis[2], 0.0, -axis[0]],
                  [-axis[1], axis[0], 0.0]])
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def stable_orientations(mesh, centroid):
    """Rotations that rest the mesh on a statically stable hull face.

    A face is stable when the centroid projects strictly inside its
    support polygon.  Returns at least one rotation (identity fallback
    for pathological meshes).
    """
    hull = ConvexHull(mesh.vertices)
    groups = {}
    exact = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        key = tuple(np.round(eq, 7))
        groups.setdefault(key, set()).update(int(i) for i in simplex)
        exact.setdefault(key, eq)
    out = []
    c = np.asarray(centroid, dtype=np.float64)
    for eq_key, vert_ids in sorted(groups.items()):
        eq = np.asarray(exact[eq_key])
        f = eq[:3] / np.linalg.norm(eq[:3])
        proj = c - (float(f @ c) + eq[3]) * f
        pts = mesh.vertices[sorted(vert_ids)]
        # planar basis for the polygon containment test
        t1 = pts[1] - pts[0] if pts.shape[0] > 1 else np.array([1.0, 0, 0])
        t1 = t1 / np.linalg.norm(t1)
        t2 = np.cross(f, t1)
        uv = np.column_stack([(pts - pts[0]) @ t1, (pts - pts[0]) @ t2])
        q = np.array([(proj - pts[0]) @ t1, (proj - pts[0]) @ t2])
        if _strictly_inside_2d(uv, q):
            out.append(_rotation_to_minus_z(f))
    if not out:
        out.append(np.eye(3))
    return out


def _strictly_inside_2d(points, q, margin=SUPPORT_MARGIN):
    """q strictly inside the convex hull of 2-D points."""
    if points.shape[0] < 3:
        return False
    try:
        hull = ConvexHull(points)
    except Exception:
        return False
    eqs = hull.equations
    return bool(np.all(eqs[:, :2] @ q + eqs[:, 2] < -margin))


@dataclass
class PlacedObject:
    name: str
    model_index: int
    pose: RigidTransform


@dataclass
class SceneSpec:
    """A settled arrangement: placed objects over the ground plane.

    meshset holds the ground at source index 0 and placed object k at
    source index k+1.
    """

    placed: list
    totebox_half: float
    meshset: MeshSet
    failures: int = 0
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def object_mesh_index(self, k):
        return k + 1


def _drop_height(obj_pts, scene: MeshSet):
    """Largest dz so the points translated by -dz first touch the scene.

    The object must start strictly above the scene so every downward hit
    has positive parameter.
    """
    dirs = np.zeros_like(obj_pts)
    dirs[:, 2] = -1.0
    t, tri = scene.raycast(obj_pts, dirs, t_min=1e-9)
    hit = np.isfinite(t)
    if not np.any(hit):
        return None
    return float(t[hit].min())


def compose_scene(models, m, seed, totebox_half=100.0, max_attempts=100,
                  drop_samples=200):
    """Place m objects chosen with replacement from models; deterministic
    per seed.  Placement failures reduce the object count and are flagged."""
    if m < 1:
        raise ValueError("need at least one object")
    if not models:
        raise ValueError("models must be non-empty")
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    chosen = rng.integers(0, len(models), size=m)
    stable_cache = {}
    placed = []
    meshes = [ground_mesh()]
    failures = 0
    for idx in chosen:
        spec = models[int(idx)]
        if idx not in stable_cache:
            stable_cache[idx] = stable_orientations(spec.mesh, spec.centroid)
        orientations = stable_cache[idx]
        scene_now = MeshSet(meshes)
        pose = _attempt_place(spec, orientations, scene_now, rng,
                              totebox_half, max_attempts, drop_samples)
        if pose is None:
            failures += 1
            continue
        placed.append(PlacedObject(spec.name, int(idx), pose))
        meshes.append(spec.mesh.transformed(pose))
    scene = SceneSpec(placed, totebox_half, MeshSet(meshes),
                      failures=failures)
    if not placed:
        raise PlacementFailure("no object could be placed")
    return scene


def _attempt_place(spec, orientations, scene, rng, half, max_attempts,
                   drop_samples):
    mesh = spec.mesh
    surf_pts, _ = sample_surface(mesh, drop_samples, rng)
    probe_local = np.concatenate([mesh.vertices, surf_pts])
    scene_top = float(scene.vertices[:, 2].max())
    for _ in range(max_attempts):
        rot_stable = orientations[int(rng.integers(len(orientations)))]
        yaw = rng.uniform(0.0, 2.0 * np.pi)
        cy, sy = np.cos(yaw), np.sin(yaw)
        rot = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]]) \
            @ rot_stable
        local = probe_local @ rot.T
        lo = local.min(axis=0)
        hi = local.max(axis=0)
        sx, sy_ = (hi[0] - lo[0]) / 2.0, (hi[1] - lo[1]) / 2.0
        if sx > half or sy_ > half:
            continue
        cx = rng.uniform(-(half - sx), half - sx)
        cyy = rng.uniform(-(half - sy_), half - sy_)
        # start strictly above everything placed so far
        z0 = scene_top + 1.0 - lo[2]
        offset = np.array([cx - (lo[0] + hi[0]) / 2.0,
                           cyy - (lo[1] + hi[1]) / 2.0, z0])
        pts = local + offset
        dz = _drop_height(pts, scene)
        if dz is None:
            continue
        offset[2] -= dz
        pose = RigidTransform(rot, offset)
        pose = _lift_clear(spec.mesh, pose, scene)
        if pose is None:
            continue
        return pose
    return None


def _lift_clear(mesh, pose, scene, max_lift=2.0):
    """Raise the object in small steps until overlap is within tolerance."""
    lifted = 0.0
    while lifted <= max_lift:
        placed = mesh.transformed(pose)
        if not scene.overlaps_triangles(placed.vertices, placed.triangles,
                                        margin=CONTACT_MARGIN):
            return pose
        lifted += LIFT_STEP
        pose = RigidTransform(pose.rotation,
                              pose.translation + np.array([0, 0, LIFT_STEP]))
    return None
