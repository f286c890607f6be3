"""Grasp quality: contacts, friction cones, wrench hulls, combined metrics.

A grasp is scored by discretizing each hard point contact's friction cone
into k edge forces, forming the 6-D primitive wrenches about the object
centroid, and measuring the distance from the wrench-space origin to the
boundary of their convex hull.  Zero when the origin is not strictly
interior (no force closure).

Two isolated point contacts can never resist a moment about the line
through them, so a literal two-point model is always rank deficient.
Flat finger pads are therefore modeled as a short line contact each: two
hard Coulomb corner contacts spaced across the pad width.  grasp_quality
does this expansion; find_contacts still reports one contact per finger.

Torques are made dimensionless with a per-object scale (default
1/rho_max, the inverse of the largest centroid-to-vertex distance) so the
quality lands in [0, 1].
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DomainError, HullFailure
from .geometry.mesh import MeshSet, TriMesh
from .geometry.transforms import orthonormal_tangents
from .grasp import Grasp

UNIT_TOL = 1e-6
CONTACT_FACING_EPS = 1e-9
RANK_TOL = 1e-10


@dataclass(frozen=True)
class Contact:
    """Hard point contact: position (mm), unit inward normal, friction mu."""

    position: np.ndarray
    inward_normal: np.ndarray
    mu: float

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        nrm = np.asarray(self.inward_normal, dtype=np.float64).reshape(3)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "inward_normal", nrm)
        if abs(np.linalg.norm(nrm) - 1.0) > UNIT_TOL:
            raise ValueError("inward normal must be unit length")
        if self.mu < 0:
            raise ValueError("friction coefficient must be non-negative")


@dataclass(frozen=True)
class QualityConfig:
    cone_edges: int = 8
    torque_scale: float | None = None    # 1/mm; None derives 1/rho_max
    hull_tol: float = 1e-9

    def __post_init__(self):
        if self.cone_edges < 3:
            raise ValueError("need at least 3 cone edges")
        if self.torque_scale is not None and self.torque_scale <= 0:
            raise ValueError("torque scale must be positive")


@dataclass(frozen=True)
class QualityResult:
    q_fc: float
    q_b: int
    q_c: float

    @staticmethod
    def zero():
        return QualityResult(0.0, 0, 0.0)


def _as_scene(obj):
    if isinstance(obj, MeshSet):
        return obj
    if isinstance(obj, TriMesh):
        return obj.scene()
    raise TypeError("expected TriMesh or MeshSet")


def find_contacts(grasp: Grasp, obj, gripper, mu):
    """Two finger contacts from closing along +-r at the grasp depth.

    The fingers close along the line through q = p - d*n; the contacts are
    the extreme surface crossings inside the opening window, and must
    straddle the closing line origin with surfaces facing the fingers.
    Returns (contact_minus, contact_plus) or None.
    """
    scene = _as_scene(obj)
    q = grasp.p - grasp.d * grasp.n
    half = gripper.max_opening / 2.0
    n_hits, t_lo, tri_lo, t_hi, tri_hi = scene.line_extremes(
        q, grasp.r, window=(-half, half))
    if n_hits < 2 or not (t_lo < 0.0 < t_hi):
        return None
    if t_hi - t_lo > gripper.max_opening:
        return None
    out_hi = scene.face_normals[tri_hi]
    out_lo = scene.face_normals[tri_lo]
    # each contacted surface must face the finger pressing on it
    if float(out_hi @ grasp.r) <= CONTACT_FACING_EPS:
        return None
    if float(out_lo @ grasp.r) >= -CONTACT_FACING_EPS:
        return None
    c_lo = Contact(q + t_lo * grasp.r, -out_lo, mu)
    c_hi = Contact(q + t_hi * grasp.r, -out_hi, mu)
    return c_lo, c_hi


def contact_sources(grasp: Grasp, scene: MeshSet, gripper):
    """Mesh ids contacted by each finger, or None (scene-level provenance)."""
    q = grasp.p - grasp.d * grasp.n
    half = gripper.max_opening / 2.0
    n_hits, t_lo, tri_lo, t_hi, tri_hi = scene.line_extremes(
        q, grasp.r, window=(-half, half))
    if n_hits < 2 or not (t_lo < 0.0 < t_hi):
        return None
    return int(scene.source[tri_lo]), int(scene.source[tri_hi])


def friction_cone(contact: Contact, k, reference=None):
    """k unit force directions evenly spaced on the Coulomb cone.

    The tangent basis anchors to `reference` (a direction not parallel to
    the normal) so the discretization co-rotates with the grasp frame;
    without one it falls back to a global-axis rule, which makes the
    discretized metric depend on world orientation.
    """
    if k < 3:
        raise ValueError("need at least 3 cone edges")
    n = contact.inward_normal
    if contact.mu == 0.0:
        return np.tile(n, (k, 1))
    alpha = np.arctan(contact.mu)
    t1 = None
    if reference is not None:
        t1 = np.cross(n, np.asarray(reference, dtype=np.float64))
        norm = np.linalg.norm(t1)
        t1 = t1 / norm if norm > 1e-9 else None
    if t1 is None:
        t1, t2 = orthonormal_tangents(n)
    else:
        t2 = np.cross(n, t1)
    phi = 2.0 * np.pi * np.arange(k) / k
    dirs = (np.cos(alpha) * n[None, :]
            + np.sin(alpha) * (np.cos(phi)[:, None] * t1[None, :]
                               + np.sin(phi)[:, None] * t2[None, :]))
    return dirs


def primitive_wrenches(contacts, torque_origin, cfg: QualityConfig,
                       torque_scale, reference=None):
    """(2k, 6) wrench rows [f, lambda*(x - o) x f] for a contact pair."""
    o = np.asarray(torque_origin, dtype=np.float64)
    rows = []
    for c in contacts:
        forces = friction_cone(c, cfg.cone_edges, reference)
        arm = c.position - o
        torques = torque_scale * np.cross(np.broadcast_to(arm, forces.shape),
                                          forces)
        rows.append(np.concatenate([forces, torques], axis=1))
    return np.concatenate(rows, axis=0)


def ferrari_canny(wrenches, tol=1e-9):
    """Distance from the wrench-space origin to the hull boundary.

    0 when the origin is not strictly inside the convex hull (including
    any rank-deficient wrench set); otherwise the minimum facet-plane
    distance, clamped to [0, 1].  Raises HullFailure when qhull cannot
    build the hull even after joggling.
    """
    w = np.asarray(wrenches, dtype=np.float64).reshape(-1, 6)
    if w.shape[0] == 0:
        raise ValueError("need at least one wrench")
    if not np.all(np.isfinite(w)):
        raise ValueError("wrenches must be finite")
    if w.shape[0] < 7:
        return 0.0           # a 6-D interior needs at least 7 points
    centered = w - w.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[5] <= RANK_TOL * max(sv[0], 1.0):
        return 0.0           # affinely rank-deficient: hull has no interior
    try:
        hull = ConvexHull(w)
    except QhullError:
        try:
            hull = ConvexHull(w, qhull_options="QJ")
        except QhullError as exc:
            raise HullFailure(f"convex hull failed: {exc}") from exc
    offsets = hull.equations[:, -1]
    if offsets.max() > -tol:
        return 0.0           # origin on or outside the boundary
    return float(min(-offsets.max(), 1.0))


def combined_metric(q_fc):
    """Binary and combined metrics from the continuous quality."""
    if q_fc < 0:
        raise DomainError("quality must be non-negative")
    q_b = 1 if q_fc > 0 else 0
    return q_b, q_b * q_fc


def pad_contacts(contacts, grasp: Grasp, half_width):
    """Expand finger contacts into pad-corner contacts.

    Each finger's flat pad is approximated as a line contact: two hard
    point contacts offset +-half_width along the pad axis s = n x r.
    """
    s = np.cross(grasp.n, grasp.r)
    out = []
    for c in contacts:
        for sign in (-1.0, 1.0):
            out.append(Contact(c.position + sign * half_width * s,
                               c.inward_normal, c.mu))
    return tuple(out)


def grasp_wrenches(grasp: Grasp, obj, centroid, mu, gripper,
                   cfg: QualityConfig = QualityConfig(), rho_max=None):
    """Wrench set scored by grasp_quality, or None when contacts fail.

    Exposed so oracles and debug dumps can inspect exactly the scored set.
    """
    scene = _as_scene(obj)
    contacts = find_contacts(grasp, scene, gripper, mu)
    if contacts is None:
        return None
    centroid = np.asarray(centroid, dtype=np.float64)
    if cfg.torque_scale is not None:
        lam = cfg.torque_scale
    else:
        if rho_max is None:
            rho_max = float(np.linalg.norm(scene.vertices - centroid,
                                           axis=1).max())
        lam = 1.0 / max(rho_max, 1e-12)
    padded = pad_contacts(contacts, grasp, gripper.finger_thickness / 2.0)
    return primitive_wrenches(padded, centroid, cfg, lam,
                              reference=grasp.n)


def grasp_quality(grasp: Grasp, obj, centroid, mu, gripper,
                  cfg: QualityConfig = QualityConfig(), rho_max=None):
    """Full pipeline: contacts -> pad wrenches about the centroid -> metrics.

    obj is the object TriMesh (or a MeshSet of it); rho_max may be passed
    to avoid recomputing the torque normalization per call.
    """
    wrenches = grasp_wrenches(grasp, obj, centroid, mu, gripper, cfg,
                              rho_max)
    if wrenches is None:
        return QualityResult.zero()
    try:
        q_fc = ferrari_canny(wrenches, cfg.hull_tol)
    except HullFailure:
        q_fc = 0.0
    q_b, q_c = combined_metric(q_fc)
    return QualityResult(q_fc, q_b, q_c)


def wrench_debug_dump(wrenches, tol=1e-9):
    """Structured dump of a wrench set and its hull for offline inspection."""
    w = np.asarray(wrenches, dtype=np.float64).reshape(-1, 6)
    info = {"wrenches": w.tolist(), "q_fc": None, "facets": []}
    try:
        q = ferrari_canny(w, tol)
        info["q_fc"] = q
        if q > 0:
            hull = ConvexHull(w)
            info["facets"] = hull.equations.tolist()
    except (HullFailure, ValueError) as exc:
        info["error"] = str(exc)
    return info
