"""Triangle meshes: construction, loading, primitives, sampling, mass.

Coordinates are millimeters.  Degenerate triangles (area <= 1e-9 mm^2) are
dropped at construction and face normals are oriented outward: by global
signed-volume sign for watertight meshes, by a per-face ray parity test
otherwise.
"""

import json
import struct

import numpy as np

from .. import kernels
from ..errors import EmptySampleDomain, NonWatertight
from .transforms import RigidTransform

MIN_TRI_AREA = 1e-9


class TriMesh:
    """Immutable triangle mesh with outward unit face normals."""

    def __init__(self, vertices, triangles, orient=True):
        v = np.ascontiguousarray(np.asarray(vertices, dtype=np.float64))
        t = np.ascontiguousarray(np.asarray(triangles, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError("vertices must be (V,3)")
        if t.size == 0:
            t = t.reshape(0, 3)
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("triangles must be (T,3)")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices contain non-finite values")
        if t.size and (t.min() < 0 or t.max() >= v.shape[0]):
            raise ValueError("triangle index out of range")

        cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]]) \
            if t.size else np.zeros((0, 3))
        area2 = np.linalg.norm(cross, axis=1)
        keep = area2 > 2.0 * MIN_TRI_AREA
        t = t[keep]
        cross = cross[keep]
        area2 = area2[keep]

        self.vertices = v
        self.triangles = np.ascontiguousarray(t)
        self.areas = 0.5 * area2
        self.face_normals = cross / area2[:, None] if t.size \
            else np.zeros((0, 3))
        self._bvh = None
        self._watertight = None
        if orient and t.size:
            self._orient_outward()
        self.vertices.setflags(write=False)
        self.triangles.setflags(write=False)
        self.face_normals.setflags(write=False)

    @property
    def num_triangles(self):
        return self.triangles.shape[0]

    @property
    def aabb(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def bvh(self):
        if self._bvh is None:
            self._bvh = kernels.build_bvh(self.vertices, self.triangles)
        return self._bvh

    def is_watertight(self):
        """Closed orientable 2-manifold: each edge used exactly twice, once
        per direction."""
        if self._watertight is None:
            self._watertight = _edge_manifold(self.triangles)
        return self._watertight

    def scene(self):
        """This mesh wrapped as a single-member MeshSet (cached)."""
        if not hasattr(self, "_scene") or self._scene is None:
            self._scene = MeshSet([self])
        return self._scene

    def signed_volume(self):
        """Signed volume of the tetrahedra against the origin (mm^3)."""
        v = self.vertices
        t = self.triangles
        if t.size == 0:
            return 0.0
        return float(np.einsum(
            "ij,ij->i", v[t[:, 0]],
            np.cross(v[t[:, 1]], v[t[:, 2]])).sum() / 6.0)

    def transformed(self, tf: RigidTransform):
        out = TriMesh.__new__(TriMesh)
        out.vertices = np.ascontiguousarray(tf.apply(self.vertices))
        out.triangles = self.triangles
        out.areas = self.areas
        out.face_normals = np.ascontiguousarray(
            tf.apply_vector(self.face_normals))
        out._bvh = None
        out._watertight = self._watertight
        out.vertices.setflags(write=False)
        out.face_normals.setflags(write=False)
        return out

    def _orient_outward(self):
        if self.is_watertight():
            if self.signed_volume() < 0.0:
                tri = np.array(self.triangles)
                tri = tri[:, [0, 2, 1]]
                self.triangles = np.ascontiguousarray(tri)
                self.face_normals = -self.face_normals
        else:
            self._orient_by_parity()
        self._bvh = None

    def _orient_by_parity(self):
        # a face normal points outward when a ray along it escapes the mesh
        # an even number of crossings after leaving the face
        centers = self.vertices[self.triangles].mean(axis=1)
        eps = 1e-6 * max(1.0, float(np.abs(self.vertices).max()))
        origins = centers + eps * self.face_normals
        bvh = kernels.build_bvh(self.vertices, self.triangles)
        hits = _count_crossings(origins, self.face_normals,
                                self.vertices, self.triangles, bvh)
        flip = hits % 2 == 1
        if np.any(flip):
            tri = np.array(self.triangles)
            tri[flip] = tri[flip][:, [0, 2, 1]]
            self.triangles = np.ascontiguousarray(tri)
            fn = np.array(self.face_normals)
            fn[flip] *= -1.0
            self.face_normals = fn


def _count_crossings(origins, dirs, verts, tris, bvh):
    """Number of surface crossings per ray, by repeated nearest casts."""
    n = origins.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    org = np.array(origins)
    active = np.arange(n)
    guard = 0
    while active.size and guard < 64:
        t, tri = kernels.raycast_nearest(org[active], dirs[active], 1e-7,
                                         verts, tris, *bvh)
        hit = np.isfinite(t)
        counts[active[hit]] += 1
        org[active[hit]] += dirs[active[hit]] * t[hit, None]
        active = active[hit]
        guard += 1
    return counts


def _edge_manifold(tris):
    if tris.shape[0] == 0:
        return False
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    fwd = {}
    for a, b in e:
        key = (int(a), int(b))
        fwd[key] = fwd.get(key, 0) + 1
    for (a, b), n in fwd.items():
        if n != 1 or fwd.get((b, a), 0) != 1:
            return False
    return True


class MassProperties:
    """Mass (g) and volume centroid (mm); watertight=False marks the
    area-weighted surface fallback."""

    def __init__(self, mass, centroid, watertight=True):
        self.mass = float(mass)
        self.centroid = np.asarray(centroid, dtype=np.float64)
        self.watertight = watertight


def mass_properties(mesh, density=0.5, allow_fallback=False):
    """Mass and centroid from mesh volume at the given density (g/cm^3).

    Raises NonWatertight on open meshes, unless allow_fallback is set in
    which case the area-weighted surface centroid is returned flagged.
    """
    if not mesh.is_watertight():
        if not allow_fallback:
            raise NonWatertight("mesh does not enclose a volume")
        c = mesh.vertices[mesh.triangles].mean(axis=1)
        w = mesh.areas / mesh.areas.sum()
        vol = abs(mesh.signed_volume())
        return MassProperties(vol / 1000.0 * density, w @ c, watertight=False)
    v = mesh.vertices
    t = mesh.triangles
    cr = np.cross(v[t[:, 1]], v[t[:, 2]])
    vols = np.einsum("ij,ij->i", v[t[:, 0]], cr) / 6.0
    total = vols.sum()
    tet_cent = (v[t[:, 0]] + v[t[:, 1]] + v[t[:, 2]]) / 4.0
    centroid = (vols[:, None] * tet_cent).sum(axis=0) / total
    mass = abs(total) / 1000.0 * density   # mm^3 -> cm^3
    return MassProperties(mass, centroid, watertight=True)


def sample_surface(mesh, n, seed):
    """n points uniform by area with their owning-face normals.

    seed may be an int or a numpy Generator.  Returns (points, normals).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    total = mesh.areas.sum() if mesh.num_triangles else 0.0
    if total <= MIN_TRI_AREA:
        raise EmptySampleDomain("mesh has no usable surface area")
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    faces = rng.choice(mesh.num_triangles, size=n, p=mesh.areas / total)
    r1 = rng.random(n)
    r2 = rng.random(n)
    s = np.sqrt(r1)
    v = mesh.vertices
    t = mesh.triangles[faces]
    pts = ((1.0 - s)[:, None] * v[t[:, 0]]
           + (s * (1.0 - r2))[:, None] * v[t[:, 1]]
           + (s * r2)[:, None] * v[t[:, 2]])
    return pts, mesh.face_normals[faces].copy()


class MeshSet:
    """Several meshes merged into one triangle soup with provenance.

    Used for scene-level queries: ray casting, gripper collision, contact
    search.  source[i] is the index of the mesh owning triangle i.
    """

    def __init__(self, meshes, transforms=None, ids=None):
        meshes = list(meshes)
        if transforms is None:
            transforms = [None] * len(meshes)
        placed = [m if tf is None else m.transformed(tf)
                  for m, tf in zip(meshes, transforms)]
        self.meshes = placed
        self.ids = list(range(len(placed))) if ids is None else list(ids)
        nv = 0
        verts = []
        tris = []
        source = []
        for k, m in enumerate(placed):
            verts.append(m.vertices)
            tris.append(m.triangles + nv)
            source.append(np.full(m.num_triangles, k, dtype=np.int64))
            nv += m.vertices.shape[0]
        if verts:
            self.vertices = np.ascontiguousarray(np.concatenate(verts))
            self.triangles = np.ascontiguousarray(np.concatenate(tris))
            self.source = np.concatenate(source)
            self.face_normals = np.concatenate(
                [m.face_normals for m in placed]) if self.triangles.size \
                else np.zeros((0, 3))
        else:
            self.vertices = np.zeros((0, 3))
            self.triangles = np.zeros((0, 3), dtype=np.int64)
            self.source = np.zeros(0, dtype=np.int64)
            self.face_normals = np.zeros((0, 3))
        self._bvh = kernels.build_bvh(self.vertices, self.triangles)

    @property
    def bvh(self):
        return self._bvh

    def raycast(self, origins, dirs, t_min=1e-9):
        """Nearest hits: (t, triangle id) with -1/inf for misses."""
        o = np.ascontiguousarray(origins, dtype=np.float64).reshape(-1, 3)
        d = np.ascontiguousarray(dirs, dtype=np.float64).reshape(-1, 3)
        return kernels.raycast_nearest(o, d, t_min, self.vertices,
                                       self.triangles, *self._bvh)

    def line_extremes(self, origin, direction, window=(-np.inf, np.inf)):
        o = np.ascontiguousarray(origin, dtype=np.float64)
        d = np.ascontiguousarray(direction, dtype=np.float64)
        return kernels.line_extremes(o, d, float(window[0]), float(window[1]),
                                     self.vertices, self.triangles,
                                     *self._bvh)

    def box_overlaps(self, center, axes, half, margin=0.0):
        return kernels.box_overlaps(
            np.ascontiguousarray(center, dtype=np.float64),
            np.ascontiguousarray(axes, dtype=np.float64),
            np.ascontiguousarray(half, dtype=np.float64),
            margin, self.vertices, self.triangles, *self._bvh)

    def overlaps_triangles(self, verts_a, tris_a, margin=0.0):
        return kernels.mesh_overlaps(
            np.ascontiguousarray(verts_a, dtype=np.float64),
            np.ascontiguousarray(tris_a, dtype=np.int64),
            margin, self.vertices, self.triangles, *self._bvh)


# ---------------------------------------------------------------------------
# procedural primitives

def make_box(extents):
    """Axis-aligned box centered at the origin; extents = full sizes."""
    e = np.asarray(extents, dtype=np.float64) / 2.0
    sign = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1)
                     for z in (-1, 1)], dtype=np.float64)
    v = sign * e
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1),
             (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    tris = []
    for a, b, c, d in quads:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return TriMesh(v, tris)


def make_cylinder(radius, height, segments=32):
    """Z-axis cylinder centered at the origin."""
    ang = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    lo = np.column_stack([ring, np.full(segments, -height / 2.0)])
    hi = np.column_stack([ring, np.full(segments, height / 2.0)])
    v = np.concatenate([lo, hi, [[0, 0, -height / 2.0], [0, 0, height / 2.0]]])
    cb = 2 * segments
    ct = 2 * segments + 1
    tris = []
    for i in range(segments):
        j = (i + 1) % segments
        tris.append((i, j, segments + j))
        tris.append((i, segments + j, segments + i))
        tris.append((cb, j, i))
        tris.append((ct, segments + i, segments + j))
    return TriMesh(v, tris)


def make_sphere(radius, subdivisions=2):
    """Icosphere centered at the origin."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array([[-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
                  [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
                  [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1]],
                 dtype=np.float64)
    v /= np.linalg.norm(v, axis=1)[:, None]
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
         (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
         (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
         (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [tuple(p) for p in v]
    index = {p: i for i, p in enumerate(verts)}

    def midpoint(a, b):
        m = (np.array(verts[a]) + np.array(verts[b])) / 2.0
        m /= np.linalg.norm(m)
        key = tuple(np.round(m, 12))
        if key not in index:
            index[key] = len(verts)
            verts.append(key)
        return index[key]

    for _ in range(subdivisions):
        nf = []
        for a, b, c in f:
            ab = midpoint(a, b)
            bc = midpoint(b, c)
            ca = midpoint(c, a)
            nf += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        f = nf
    return TriMesh(np.array(verts) * radius, f)


def make_bowl(outer_radius, thickness, segments=32, rings=6):
    """Open bowl: hemispherical shell with a flat circular base, opening up.

    Centered so the rim sits at z=0 and the base rests near z=-0.85*R.
    """
    R = float(outer_radius)
    r = R - float(thickness)
    cut = 0.85
    if r <= cut * R:
        raise ValueError("bowl wall too thick for the flat-base construction")
    verts = []
    rows_out = []
    rows_in = []
    # polar angle from the rim (pi/2) down to the base cut for both shells
    for radius, rows in ((R, rows_out), (r, rows_in)):
        amax = np.arcsin(min(1.0, cut * R / radius)) if radius >= cut * R \
            else np.pi / 2.0
        angles = np.linspace(0.0, amax, rings + 1)
        for a in angles:
            row = []
            rho = radius * np.cos(a)
            z = -radius * np.sin(a)
            for s in range(segments):
                th = 2.0 * np.pi * s / segments
                row.append(len(verts))
                verts.append((rho * np.cos(th), rho * np.sin(th), z))
            rows.append(row)
    tris = []

    def stitch(rows, flip):
        for a, b in zip(rows[:-1], rows[1:]):
            for s in range(segments):
                t = (s + 1) % segments
                if flip:
                    tris.append((a[s], b[s], a[t]))
                    tris.append((a[t], b[s], b[t]))
                else:
                    tris.append((a[s], a[t], b[s]))
                    tris.append((a[t], b[t], b[s]))

    stitch(rows_out, flip=False)
    stitch(rows_in, flip=True)
    # rim ring joining the two shells at z=0
    top_o, top_i = rows_out[0], rows_in[0]
    for s in range(segments):
        t = (s + 1) % segments
        tris.append((top_o[s], top_i[s], top_o[t]))
        tris.append((top_o[t], top_i[s], top_i[t]))
    # base disks closing both shells
    base_o = rows_out[-1]
    base_i = rows_in[-1]
    zo = verts[base_o[0]][2]
    zi = verts[base_i[0]][2]
    co = len(verts)
    verts.append((0.0, 0.0, zo))
    ci = len(verts)
    verts.append((0.0, 0.0, zi))
    for s in range(segments):
        t = (s + 1) % segments
        tris.append((co, base_o[s], base_o[t]))
        tris.append((ci, base_i[t], base_i[s]))
    return TriMesh(np.array(verts, dtype=np.float64), tris)


_PRIMITIVES = {
    "box": lambda s: make_box(s["extents"]),
    "cylinder": lambda s: make_cylinder(s["radius"], s["height"],
                                        int(s.get("segments", 32))),
    "sphere": lambda s: make_sphere(s["radius"],
                                    int(s.get("subdivisions", 2))),
    "bowl": lambda s: make_bowl(s["outer_radius"], s["thickness"],
                                int(s.get("segments", 32)),
                                int(s.get("rings", 6))),
}


def primitive_from_spec(spec):
    """Build a primitive mesh from a parsed spec dict."""
    kind = spec.get("primitive")
    if kind not in _PRIMITIVES:
        raise ValueError(f"unknown primitive {kind!r}")
    scale = _unit_scale(spec.get("units", "mm"))
    mesh = _PRIMITIVES[kind](spec)
    if scale != 1.0:
        return TriMesh(mesh.vertices * scale, mesh.triangles)
    return mesh


# ---------------------------------------------------------------------------
# file loaders

def _unit_scale(units):
    try:
        return {"mm": 1.0, "cm": 10.0, "m": 1000.0}[units]
    except KeyError:
        raise ValueError(f"unknown units {units!r}") from None


def load_mesh(path, units="mm"):
    """Load STL (ascii/binary), OBJ (v/f only) or a primitive .json spec."""
    p = str(path)
    if p.lower().endswith(".stl"):
        v, t = _load_stl(p)
    elif p.lower().endswith(".obj"):
        v, t = _load_obj(p)
    elif p.lower().endswith(".json"):
        with open(p) as fh:
            return primitive_from_spec(json.load(fh))
    else:
        raise ValueError(f"unsupported mesh format: {p}")
    return TriMesh(np.asarray(v) * _unit_scale(units), t)


def _load_stl(path):
    with open(path, "rb") as fh:
        head = fh.read(5)
    if head == b"solid" and _is_ascii_stl(path):
        return _load_stl_ascii(path)
    return _load_stl_binary(path)


def _is_ascii_stl(path):
    # binary files may still start with "solid"; verify a facet keyword
    with open(path, "rb") as fh:
        blob = fh.read(512)
    try:
        return b"facet" in blob or blob.strip() == b"solid"
    except Exception:
        return False


def _load_stl_ascii(path):
    verts = []
    tris = []
    cur = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "vertex":
                cur.append([float(x) for x in parts[1:4]])
                if len(cur) == 3:
                    base = len(verts)
                    verts.extend(cur)
                    tris.append((base, base + 1, base + 2))
                    cur = []
    return _dedupe(np.array(verts, dtype=np.float64).reshape(-1, 3), tris)


def _load_stl_binary(path):
    with open(path, "rb") as fh:
        fh.seek(80)
        (n,) = struct.unpack("<I", fh.read(4))
        data = np.frombuffer(fh.read(n * 50), dtype=np.uint8)
    if data.size != n * 50:
        raise ValueError("truncated binary STL")
    rec = data.reshape(n, 50)
    xyz = rec[:, 12:48].copy().view("<f4").reshape(n, 3, 3).astype(np.float64)
    verts = xyz.reshape(-1, 3)
    tris = np.arange(3 * n, dtype=np.int64).reshape(n, 3)
    return _dedupe(verts, tris)


def _dedupe(verts, tris):
    uniq, inv = np.unique(np.round(verts, 9), axis=0, return_inverse=True)
    tris = inv[np.asarray(tris, dtype=np.int64)]
    return uniq, tris


def _load_obj(path):
    verts = []
    tris = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                ids = [int(tok.split("/")[0]) for tok in parts[1:]]
                ids = [i - 1 if i > 0 else len(verts) + i for i in ids]
                for k in range(1, len(ids) - 1):   # fan triangulation
                    tris.append((ids[0], ids[k], ids[k + 1]))
    return np.array(verts, dtype=np.float64).reshape(-1, 3), tris


def save_stl(mesh, path):
    """Binary STL writer (debug/export convenience)."""
    t = mesh.triangles
    n = t.shape[0]
    rec = np.zeros(n, dtype=np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)),
                                      ("attr", "<u2")]))
    rec["n"] = mesh.face_normals.astype("<f4")
    rec["v"] = mesh.vertices[t].astype("<f4")
    with open(path, "wb") as fh:
        fh.write(b"\0" * 80)
        fh.write(struct.pack("<I", n))
        fh.write(rec.tobytes())
