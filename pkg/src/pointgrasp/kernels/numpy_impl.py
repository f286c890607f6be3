"""Pure-numpy kernel fallback.

Same contracts as :mod:`pointgrasp.kernels.numba_impl`.  Ray casting and
overlap queries here are brute force over all triangles (the BVH arrays are
accepted but unused) which doubles as the naive oracle the accelerated
backend is tested against.  Selection rules (nearest hit, tie on triangle
id, neighbor ordering) are identical across backends.
"""

import numpy as np

from .common import AXIS_EPS2, BARY_EPS, RAY_DET_EPS


def _dot3(a, b):
    """Left-to-right 3-component dot; matches the scalar kernels exactly."""
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _moller_trumbore(origins, dirs, verts, tris):
    """Per (ray, triangle) intersection parameter, +inf where no hit.

    origins/dirs are (R,3); result is (R,T).  Hits at any t are reported;
    the caller clips the parameter range.
    """
    v0 = verts[tris[:, 0]]
    e1 = verts[tris[:, 1]] - v0
    e2 = verts[tris[:, 2]] - v0

    d = dirs[:, None, :]
    pvec = np.cross(d, e2[None, :, :])
    det = _dot3(e1[None, :, :], pvec)
    ok = np.abs(det) >= RAY_DET_EPS
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)

    tvec = origins[:, None, :] - v0[None, :, :]
    u = _dot3(tvec, pvec) * inv
    ok &= (u >= -BARY_EPS) & (u <= 1.0 + BARY_EPS)

    qvec = np.cross(tvec, e1[None, :, :])
    v = _dot3(d, qvec) * inv
    ok &= (v >= -BARY_EPS) & (u + v <= 1.0 + BARY_EPS)

    t = _dot3(e2[None, :, :], qvec) * inv
    return np.where(ok, t, np.inf)


def raycast_nearest(origins, dirs, t_min, verts, tris,
                    bmin, bmax, left, right, start, count, order):
    """Nearest hit per ray with t > t_min.

    Returns (t, tri) with t=+inf, tri=-1 for misses.  Ties on t resolve to
    the smallest triangle index.
    """
    n = origins.shape[0]
    out_t = np.full(n, np.inf)
    out_tri = np.full(n, -1, dtype=np.int64)
    nt = tris.shape[0]
    if nt == 0 or n == 0:
        return out_t, out_tri
    chunk = max(1, 1_000_000 // nt)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        tmat = _moller_trumbore(origins[lo:hi], dirs[lo:hi], verts, tris)
        tmat = np.where(tmat > t_min, tmat, np.inf)
        best = np.argmin(tmat, axis=1)
        tbest = tmat[np.arange(hi - lo), best]
        hit = np.isfinite(tbest)
        out_t[lo:hi] = np.where(hit, tbest, np.inf)
        out_tri[lo:hi] = np.where(hit, best, -1)
    return out_t, out_tri


def line_extremes(origin, direction, window_lo, window_hi, verts, tris,
                  bmin, bmax, left, right, start, count, order):
    """Extreme line/mesh intersections with parameter in [window_lo, window_hi].

    Returns (n_hits, t_lo, tri_lo, t_hi, tri_hi); tri ids are -1 and the t
    values ±inf when there is no hit in the window.  Ties resolve to the
    smallest triangle index.
    """
    if tris.shape[0] == 0:
        return 0, np.inf, -1, -np.inf, -1
    t = _moller_trumbore(origin[None, :], direction[None, :], verts, tris)[0]
    hits = np.isfinite(t) & (t >= window_lo) & (t <= window_hi)
    n_hits = int(np.count_nonzero(hits))
    if n_hits == 0:
        return 0, np.inf, -1, -np.inf, -1
    t_hi = np.max(np.where(hits, t, -np.inf))
    t_lo = np.min(np.where(hits, t, np.inf))
    tri_lo = int(np.nonzero(hits & (t == t_lo))[0][0])
    tri_hi = int(np.nonzero(hits & (t == t_hi))[0][0])
    return n_hits, float(t_lo), tri_lo, float(t_hi), tri_hi


def _tri_box_sat(p0, p1, p2, half, margin):
    """Axis-aligned box [-half,half] vs many triangles, Akenine-Moller SAT.

    pX are (T,3) triangle vertices already in the box frame.  A pair is
    separated when some axis shows a normalized gap above -margin, so with
    a positive margin shallow overlaps still count as separated.
    """
    alive = np.ones(p0.shape[0], dtype=bool)

    # box face axes (unit, no normalization needed)
    for k in range(3):
        lo = np.minimum(np.minimum(p0[:, k], p1[:, k]), p2[:, k])
        hi = np.maximum(np.maximum(p0[:, k], p1[:, k]), p2[:, k])
        alive &= ~((lo - half[k] > -margin) | (-half[k] - hi > -margin))

    # triangle plane
    e0 = p1 - p0
    nrm = np.cross(e0, p2 - p0)
    len2 = np.einsum("tk,tk->t", nrm, nrm)
    good = len2 > AXIS_EPS2
    scale = np.sqrt(np.where(good, len2, 1.0))
    r = (half[0] * np.abs(nrm[:, 0]) + half[1] * np.abs(nrm[:, 1])
         + half[2] * np.abs(nrm[:, 2]))
    dist = np.einsum("tk,tk->t", nrm, p0)
    alive &= ~(good & ((np.abs(dist) - r) / scale > -margin))

    # nine edge cross products (box axis x edge)
    for e in (e0, p2 - p1, p0 - p2):
        for k in range(3):
            ax = np.zeros_like(e)
            if k == 0:
                ax[:, 1] = -e[:, 2]
                ax[:, 2] = e[:, 1]
            elif k == 1:
                ax[:, 0] = e[:, 2]
                ax[:, 2] = -e[:, 0]
            else:
                ax[:, 0] = -e[:, 1]
                ax[:, 1] = e[:, 0]
            len2 = np.einsum("tk,tk->t", ax, ax)
            good = len2 > AXIS_EPS2
            scale = np.sqrt(np.where(good, len2, 1.0))
            q0 = np.einsum("tk,tk->t", p0, ax)
            q1 = np.einsum("tk,tk->t", p1, ax)
            q2 = np.einsum("tk,tk->t", p2, ax)
            lo = np.minimum(np.minimum(q0, q1), q2)
            hi = np.maximum(np.maximum(q0, q1), q2)
            ext = (half[0] * np.abs(ax[:, 0]) + half[1] * np.abs(ax[:, 1])
                   + half[2] * np.abs(ax[:, 2]))
            alive &= ~(good & (((lo - ext) / scale > -margin)
                               | ((-ext - hi) / scale > -margin)))
    return alive


def box_overlaps(center, axes, half, margin, verts, tris,
                 bmin, bmax, left, right, start, count, order):
    """True when the oriented box overlaps any mesh triangle deeper than margin."""
    if tris.shape[0] == 0:
        return False
    local = (verts - center) @ axes.T
    p0 = local[tris[:, 0]]
    p1 = local[tris[:, 1]]
    p2 = local[tris[:, 2]]
    return bool(np.any(_tri_box_sat(p0, p1, p2, half, margin)))


def _tri_tri_overlap(a0, a1, a2, q0, q1, q2, margin):
    """SAT over the 11 candidate axes for one triangle A against many B."""
    alive = np.ones(q0.shape[0], dtype=bool)

    def batch_axis(ax):
        nonlocal alive
        len2 = np.einsum("tk,tk->t", ax, ax)
        good = len2 > AXIS_EPS2
        scale = np.sqrt(np.where(good, len2, 1.0))
        pa = np.stack([ax @ a0, ax @ a1, ax @ a2])
        qa = np.stack([np.einsum("tk,tk->t", q0, ax),
                       np.einsum("tk,tk->t", q1, ax),
                       np.einsum("tk,tk->t", q2, ax)])
        lo_a = pa.min(axis=0) / scale
        hi_a = pa.max(axis=0) / scale
        lo_b = qa.min(axis=0) / scale
        hi_b = qa.max(axis=0) / scale
        alive &= ~(good & ((lo_b - hi_a > -margin) | (lo_a - hi_b > -margin)))

    batch_axis(np.broadcast_to(np.cross(a1 - a0, a2 - a0), q0.shape).copy())
    batch_axis(np.cross(q1 - q0, q2 - q0))
    for u in (a1 - a0, a2 - a1, a0 - a2):
        for vb in (q1 - q0, q2 - q1, q0 - q2):
            batch_axis(np.cross(np.broadcast_to(u, vb.shape), vb))
    return alive


def mesh_overlaps(verts_a, tris_a, margin, verts_b, tris_b,
                  bmin, bmax, left, right, start, count, order):
    """True when any triangle of mesh A overlaps mesh B deeper than margin."""
    if tris_a.shape[0] == 0 or tris_b.shape[0] == 0:
        return False
    q0 = verts_b[tris_b[:, 0]]
    q1 = verts_b[tris_b[:, 1]]
    q2 = verts_b[tris_b[:, 2]]
    for ia in range(tris_a.shape[0]):
        a0 = verts_a[tris_a[ia, 0]]
        a1 = verts_a[tris_a[ia, 1]]
        a2 = verts_a[tris_a[ia, 2]]
        if np.any(_tri_tri_overlap(a0, a1, a2, q0, q1, q2, margin)):
            return True
    return False


def fps(points, k, start):
    """Farthest point sampling; argmax ties resolve to the smallest index."""
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = start
    diff = points - points[start]
    d2 = np.einsum("nk,nk->n", diff, diff)
    for i in range(1, k):
        nxt = int(np.argmax(d2))
        chosen[i] = nxt
        diff = points - points[nxt]
        d2 = np.minimum(d2, np.einsum("nk,nk->n", diff, diff))
    return chosen


def ball_query(points, centroids, radius, cap):
    """Up to cap nearest neighbors within radius of each centroid.

    Returns (idx (K,cap), counts (K,)).  Neighbors are ordered by
    (distance, index); unused slots repeat slot 0.
    """
    kc = centroids.shape[0]
    idx = np.zeros((kc, cap), dtype=np.int64)
    counts = np.zeros(kc, dtype=np.int64)
    r2 = radius * radius
    for i in range(kc):
        diff = points - centroids[i]
        d2 = np.einsum("nk,nk->n", diff, diff)
        within = np.nonzero(d2 <= r2)[0]
        if within.size == 0:
            continue
        order_i = within[np.argsort(d2[within], kind="stable")]
        m = min(cap, order_i.size)
        idx[i, :m] = order_i[:m]
        if m < cap:
            idx[i, m:] = order_i[0]
        counts[i] = m
    return idx, counts


def three_nn(query, ref):
    """Indices and squared distances of the 3 nearest ref points per query.

    When ref has fewer than 3 points the nearest index is repeated.
    Ordering is by (distance, index).
    """
    nq = query.shape[0]
    diff = query[:, None, :] - ref[None, :, :]
    d2 = np.einsum("qrk,qrk->qr", diff, diff)
    order = np.argsort(d2, axis=1, kind="stable")
    m = min(3, ref.shape[0])
    idx = np.empty((nq, 3), dtype=np.int64)
    out = np.empty((nq, 3))
    idx[:, :m] = order[:, :m]
    out[:, :m] = np.take_along_axis(d2, order[:, :m], axis=1)
    for j in range(m, 3):
        idx[:, j] = idx[:, 0]
        out[:, j] = out[:, 0]
    return idx, out
