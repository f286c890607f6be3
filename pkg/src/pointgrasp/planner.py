"""Single-object grasp planning.

For each sampled surface point: sweep the opening direction through
n_rotations about the approach normal, find the deepest collision-free
depth per rotation, and score every (rotation, depth) candidate on the
1 mm depth grid.  The best-scoring candidate becomes the point's major
grasp, the remaining positive candidates its supplementary fallbacks,
and points with no positive candidate become negative grasp points.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry.gripper import GripperModel, approach_sweep
from .geometry.mesh import TriMesh, mass_properties, sample_surface
from .geometry.transforms import (RigidTransform, orthonormal_tangents,
                                  rotate_about_axis)
from .grasp import Grasp
from .quality import QualityConfig, grasp_quality

GRID_TOL = 1e-9


@dataclass(frozen=True)
class PlannerConfig:
    n_samples: int = 300
    n_rotations: int = 36
    d_min: float = 20.0
    supp_step: float = 1.0
    mu: float = 0.2
    sweep_limit: float = 40.0
    d_max: float = 40.0

    def __post_init__(self):
        if self.n_samples < 1 or self.n_rotations < 1:
            raise ValueError("counts must be at least 1")
        if self.d_min <= 0 or self.supp_step <= 0 or self.sweep_limit <= 0:
            raise ValueError("distances must be positive")


@dataclass
class ObjectSpec:
    """An object model with the physical attributes planning needs."""

    name: str
    mesh: TriMesh
    mass: float
    centroid: np.ndarray
    mu: float = 0.2
    pose: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        self.centroid = np.asarray(self.centroid, dtype=np.float64)
        self.rho_max = float(np.linalg.norm(
            self.mesh.vertices - self.centroid, axis=1).max())

    @staticmethod
    def from_mesh(name, mesh, density=0.5, mu=0.2, pose=None):
        props = mass_properties(mesh, density)
        return ObjectSpec(name, mesh, props.mass, props.centroid, mu,
                          pose or RigidTransform.identity())


@dataclass
class PointPlan:
    point: np.ndarray
    normal: np.ndarray
    major: tuple | None                 # (Grasp, q_c)
    supplementary: list                 # [(Grasp, q_c)] sorted by q_c desc

    @property
    def is_negative(self):
        return self.major is None


@dataclass
class SingleObjectGraspSet:
    object_name: str
    seed: int
    majors: list                        # [(Grasp, q_c)]
    supplementary: list                 # parallel list of [(Grasp, q_c)]
    negative_points: np.ndarray         # (M,3)
    negative_normals: np.ndarray        # (M,3)


def rotation_directions(normal, n_rotations):
    """Opening directions: r0 = normalize(n x a) with a the global axis
    least parallel to n, then equal increments about n."""
    r0, _ = orthonormal_tangents(normal)
    step = 2.0 * np.pi / n_rotations
    return [rotate_about_axis(r0, normal, i * step)
            for i in range(n_rotations)]


def enumerate_depths(d_min, d, step=1.0):
    """Depth grid {d_min, d_min+step, ...} up to and including d."""
    if d < d_min:
        raise DomainError(f"depth {d} below minimum {d_min}")
    count = int(np.floor((d - d_min) / step + GRID_TOL))
    vals = [d_min + i * step for i in range(count + 1)]
    if d - vals[-1] > GRID_TOL:
        vals.append(float(d))
    return vals


def plan_point(obj: ObjectSpec, point, normal, gripper: GripperModel,
               cfg: PlannerConfig, qcfg: QualityConfig = QualityConfig()):
    """Plan all candidate grasps at one sampled surface point."""
    point = np.asarray(point, dtype=np.float64)
    normal = np.asarray(normal, dtype=np.float64)
    scene = obj.mesh.scene()
    candidates = []    # (q_c, rot_index, depth, Grasp)
    for i, r in enumerate(rotation_directions(normal, cfg.n_rotations)):
        d_deepest = approach_sweep(scene, point, normal, r, gripper,
                                   cfg.sweep_limit, step=cfg.supp_step)
        if d_deepest < cfg.d_min:       # "larger than D_min" read inclusive
            continue
        top = min(d_deepest, cfg.d_max)
        for depth in enumerate_depths(cfg.d_min, top, cfg.supp_step):
            g = Grasp(point, normal, r, depth)
            res = grasp_quality(g, scene, obj.centroid, obj.mu, gripper,
                                qcfg, rho_max=obj.rho_max)
            if res.q_c > 0.0:
                candidates.append((res.q_c, i, depth, g))
    if not candidates:
        return PointPlan(point, normal, None, [])
    # best quality; ties prefer the lowest rotation index, then deepest
    candidates.sort(key=lambda c: (-c[0], c[1], -c[2]))
    major = (candidates[0][3], candidates[0][0])
    supp = [(c[3], c[0]) for c in candidates[1:]]
    return PointPlan(point, normal, major, supp)


def plan_object(obj: ObjectSpec, gripper: GripperModel, cfg: PlannerConfig,
                qcfg: QualityConfig = QualityConfig(), seed=0):
    """Sample the surface and plan every point; deterministic per seed."""
    pts, nrms = sample_surface(obj.mesh, cfg.n_samples, seed)
    majors = []
    supplementary = []
    neg_p = []
    neg_n = []
    for p, n in zip(pts, nrms):
        plan = plan_point(obj, p, n, gripper, cfg, qcfg)
        if plan.is_negative:
            neg_p.append(plan.point)
            neg_n.append(plan.normal)
        else:
            majors.append(plan.major)
            supplementary.append(plan.supplementary)
    return SingleObjectGraspSet(
        obj.name, int(seed), majors, supplementary,
        np.asarray(neg_p, dtype=np.float64).reshape(-1, 3),
        np.asarray(neg_n, dtype=np.float64).reshape(-1, 3))


# ---------------------------------------------------------------------------
# grasp-set binary serialization (little-endian, magic "PGGS")

_MAGIC = b"PGGS"
_VERSION = 1


def _pack_graded(fh, entries):
    fh.write(struct.pack("<I", len(entries)))
    if entries:
        rows = np.stack([np.concatenate([g.as_row(), [q]])
                         for g, q in entries])
        fh.write(rows.astype("<f8").tobytes())


def _unpack_graded(fh):
    (n,) = struct.unpack("<I", fh.read(4))
    out = []
    if n:
        rows = np.frombuffer(fh.read(n * 11 * 8), dtype="<f8").reshape(n, 11)
        out = [(Grasp.from_row(r[:10]), float(r[10])) for r in rows]
    return out


def save_grasp_set(gs: SingleObjectGraspSet, path):
    with open(path, "wb") as fh:
        name = gs.object_name.encode("utf-8")
        fh.write(_MAGIC)
        fh.write(struct.pack("<IqI", _VERSION, gs.seed, len(name)))
        fh.write(name)
        _pack_graded(fh, gs.majors)
        for supp in gs.supplementary:
            _pack_graded(fh, supp)
        m = gs.negative_points.shape[0]
        fh.write(struct.pack("<I", m))
        fh.write(gs.negative_points.astype("<f8").tobytes())
        fh.write(gs.negative_normals.astype("<f8").tobytes())


def load_grasp_set(path):
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path} is not a grasp-set file")
        version, seed, name_len = struct.unpack("<IqI", fh.read(16))
        if version != _VERSION:
            raise ValueError(f"unsupported grasp-set version {version}")
        name = fh.read(name_len).decode("utf-8")
        majors = _unpack_graded(fh)
        supplementary = [_unpack_graded(fh) for _ in majors]
        (m,) = struct.unpack("<I", fh.read(4))
        neg_p = np.frombuffer(fh.read(m * 24), dtype="<f8").reshape(m, 3)
        neg_n = np.frombuffer(fh.read(m * 24), dtype="<f8").reshape(m, 3)
        return SingleObjectGraspSet(name, seed, majors, supplementary,
                                    neg_p.copy(), neg_n.copy())
