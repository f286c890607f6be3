"""Numba-accelerated kernels.

Scalar re-implementations of the contracts in
:mod:`pointgrasp.kernels.numpy_impl`, with BVH traversal for the mesh
queries.  Predicates, epsilons and tie-breaking follow the numpy fallback
exactly so both backends agree.
"""

import numpy as np
from numba import njit

from .common import AXIS_EPS2, BARY_EPS, RAY_DET_EPS, STACK_DEPTH


@njit(cache=True, inline="always", error_model="numpy")
def _hit_tri(ox, oy, oz, dx, dy, dz, verts, tris, it):
    """Moller-Trumbore for one (ray, triangle); returns t or +inf."""
    a0 = tris[it, 0]
    a1 = tris[it, 1]
    a2 = tris[it, 2]
    v0x = verts[a0, 0]
    v0y = verts[a0, 1]
    v0z = verts[a0, 2]
    e1x = verts[a1, 0] - v0x
    e1y = verts[a1, 1] - v0y
    e1z = verts[a1, 2] - v0z
    e2x = verts[a2, 0] - v0x
    e2y = verts[a2, 1] - v0y
    e2z = verts[a2, 2] - v0z
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    if abs(det) < RAY_DET_EPS:
        return np.inf
    inv = 1.0 / det
    tx = ox - v0x
    ty = oy - v0y
    tz = oz - v0z
    u = (tx * px + ty * py + tz * pz) * inv
    if u < -BARY_EPS or u > 1.0 + BARY_EPS:
        return np.inf
    qx = ty * e1z - tz * e1y
    qy = tz * e1x - tx * e1z
    qz = tx * e1y - ty * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < -BARY_EPS or u + v > 1.0 + BARY_EPS:
        return np.inf
    return (e2x * qx + e2y * qy + e2z * qz) * inv


@njit(cache=True, inline="always", error_model="numpy")
def _slab(ox, oy, oz, dx, dy, dz, lo, hi, node, t0, t1):
    """Ray/AABB slab test over [t0, t1]; NaNs fall through as non-pruning."""
    tmin = t0
    tmax = t1
    for k in range(3):
        if k == 0:
            o = ox
            d = dx
        elif k == 1:
            o = oy
            d = dy
        else:
            o = oz
            d = dz
        inv = 1.0 / d
        ta = (lo[node, k] - o) * inv
        tb = (hi[node, k] - o) * inv
        if ta > tb:
            ta, tb = tb, ta
        if ta > tmin:
            tmin = ta
        if tb < tmax:
            tmax = tb
        if tmin > tmax:
            return False
    return True


@njit(cache=True, error_model="numpy")
def raycast_nearest(origins, dirs, t_min, verts, tris,
                    bmin, bmax, left, right, start, count, order):
    n = origins.shape[0]
    out_t = np.full(n, np.inf)
    out_tri = np.full(n, -1, dtype=np.int64)
    if tris.shape[0] == 0 or bmin.shape[0] == 0:
        return out_t, out_tri
    stack = np.empty(STACK_DEPTH, dtype=np.int64)
    for r in range(n):
        ox = origins[r, 0]
        oy = origins[r, 1]
        oz = origins[r, 2]
        dx = dirs[r, 0]
        dy = dirs[r, 1]
        dz = dirs[r, 2]
        best_t = np.inf
        best_tri = -1
        top = 0
        stack[top] = 0
        top += 1
        while top > 0:
            top -= 1
            node = stack[top]
            if not _slab(ox, oy, oz, dx, dy, dz, bmin, bmax, node,
                         t_min, best_t):
                continue
            if left[node] < 0:
                s = start[node]
                for j in range(count[node]):
                    it = order[s + j]
                    t = _hit_tri(ox, oy, oz, dx, dy, dz, verts, tris, it)
                    if t > t_min and (t < best_t
                                      or (t == best_t and it < best_tri)):
                        best_t = t
                        best_tri = it
            else:
                stack[top] = left[node]
                top += 1
                stack[top] = right[node]
                top += 1
        out_t[r] = best_t
        out_tri[r] = best_tri
    return out_t, out_tri


@njit(cache=True, error_model="numpy")
def line_extremes(origin, direction, window_lo, window_hi, verts, tris,
                  bmin, bmax, left, right, start, count, order):
    if tris.shape[0] == 0 or bmin.shape[0] == 0:
        return 0, np.inf, -1, -np.inf, -1
    ox = origin[0]
    oy = origin[1]
    oz = origin[2]
    dx = direction[0]
    dy = direction[1]
    dz = direction[2]
    n_hits = 0
    t_lo = np.inf
    t_hi = -np.inf
    tri_lo = -1
    tri_hi = -1
    stack = np.empty(STACK_DEPTH, dtype=np.int64)
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        node = stack[top]
        if not _slab(ox, oy, oz, dx, dy, dz, bmin, bmax, node,
                     window_lo, window_hi):
            continue
        if left[node] < 0:
            s = start[node]
            for j in range(count[node]):
                it = order[s + j]
                t = _hit_tri(ox, oy, oz, dx, dy, dz, verts, tris, it)
                if t == np.inf or t < window_lo or t > window_hi:
                    continue
                n_hits += 1
                if t < t_lo or (t == t_lo and it < tri_lo):
                    t_lo = t
                    tri_lo = it
                if t > t_hi or (t == t_hi and it < tri_hi):
                    t_hi = t
                    tri_hi = it
        else:
            stack[top] = left[node]
            top += 1
            stack[top] = right[node]
            top += 1
    if n_hits == 0:
        return 0, np.inf, -1, -np.inf, -1
    return n_hits, t_lo, tri_lo, t_hi, tri_hi


@njit(cache=True, inline="always", error_model="numpy")
def _tri_box_sat_one(p0, p1, p2, half, margin):
    """Box [-half,half] vs one triangle in the box frame; True on overlap."""
    # box face axes
    for k in range(3):
        lo = min(min(p0[k], p1[k]), p2[k])
        hi = max(max(p0[k], p1[k]), p2[k])
        if lo - half[k] > -margin or -half[k] - hi > -margin:
            return False
    e0x = p1[0] - p0[0]
    e0y = p1[1] - p0[1]
    e0z = p1[2] - p0[2]
    e1x = p2[0] - p1[0]
    e1y = p2[1] - p1[1]
    e1z = p2[2] - p1[2]
    e2x = p0[0] - p2[0]
    e2y = p0[1] - p2[1]
    e2z = p0[2] - p2[2]
    # triangle plane (normal = e0 x (p2 - p0))
    gx = p2[0] - p0[0]
    gy = p2[1] - p0[1]
    gz = p2[2] - p0[2]
    nx = e0y * gz - e0z * gy
    ny = e0z * gx - e0x * gz
    nz = e0x * gy - e0y * gx
    len2 = nx * nx + ny * ny + nz * nz
    if len2 > AXIS_EPS2:
        scale = np.sqrt(len2)
        rr = half[0] * abs(nx) + half[1] * abs(ny) + half[2] * abs(nz)
        dist = nx * p0[0] + ny * p0[1] + nz * p0[2]
        if (abs(dist) - rr) / scale > -margin:
            return False
    # nine edge cross products (box axis x edge)
    for which in range(3):
        if which == 0:
            ex = e0x
            ey = e0y
            ez = e0z
        elif which == 1:
            ex = e1x
            ey = e1y
            ez = e1z
        else:
            ex = e2x
            ey = e2y
            ez = e2z
        for k in range(3):
            if k == 0:
                ax = 0.0
                ay = -ez
                az = ey
            elif k == 1:
                ax = ez
                ay = 0.0
                az = -ex
            else:
                ax = -ey
                ay = ex
                az = 0.0
            len2 = ax * ax + ay * ay + az * az
            if len2 <= AXIS_EPS2:
                continue
            scale = np.sqrt(len2)
            q0 = p0[0] * ax + p0[1] * ay + p0[2] * az
            q1 = p1[0] * ax + p1[1] * ay + p1[2] * az
            q2 = p2[0] * ax + p2[1] * ay + p2[2] * az
            lo = min(min(q0, q1), q2)
            hi = max(max(q0, q1), q2)
            ext = half[0] * abs(ax) + half[1] * abs(ay) + half[2] * abs(az)
            if (lo - ext) / scale > -margin or (-ext - hi) / scale > -margin:
                return False
    return True


@njit(cache=True, error_model="numpy")
def box_overlaps(center, axes, half, margin, verts, tris,
                 bmin, bmax, left, right, start, count, order):
    if tris.shape[0] == 0 or bmin.shape[0] == 0:
        return False
    # world-frame AABB of the oriented box
    wlo = np.empty(3)
    whi = np.empty(3)
    for j in range(3):
        e = (half[0] * abs(axes[0, j]) + half[1] * abs(axes[1, j])
             + half[2] * abs(axes[2, j]))
        wlo[j] = center[j] - e - margin
        whi[j] = center[j] + e + margin
    p0 = np.empty(3)
    p1 = np.empty(3)
    p2 = np.empty(3)
    stack = np.empty(STACK_DEPTH, dtype=np.int64)
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        node = stack[top]
        miss = False
        for j in range(3):
            if bmin[node, j] > whi[j] or bmax[node, j] < wlo[j]:
                miss = True
                break
        if miss:
            continue
        if left[node] < 0:
            s = start[node]
            for jj in range(count[node]):
                it = order[s + jj]
                for k in range(3):
                    vid = tris[it, k]
                    rx = verts[vid, 0] - center[0]
                    ry = verts[vid, 1] - center[1]
                    rz = verts[vid, 2] - center[2]
                    if k == 0:
                        tgt = p0
                    elif k == 1:
                        tgt = p1
                    else:
                        tgt = p2
                    tgt[0] = rx * axes[0, 0] + ry * axes[0, 1] + rz * axes[0, 2]
                    tgt[1] = rx * axes[1, 0] + ry * axes[1, 1] + rz * axes[1, 2]
                    tgt[2] = rx * axes[2, 0] + ry * axes[2, 1] + rz * axes[2, 2]
                if _tri_box_sat_one(p0, p1, p2, half, margin):
                    return True
        else:
            stack[top] = left[node]
            top += 1
            stack[top] = right[node]
            top += 1
    return False


@njit(cache=True, inline="always", error_model="numpy")
def _axis_separates(ax, ay, az, a0, a1, a2, b0, b1, b2, margin):
    len2 = ax * ax + ay * ay + az * az
    if len2 <= AXIS_EPS2:
        return False
    scale = np.sqrt(len2)
    pa0 = a0[0] * ax + a0[1] * ay + a0[2] * az
    pa1 = a1[0] * ax + a1[1] * ay + a1[2] * az
    pa2 = a2[0] * ax + a2[1] * ay + a2[2] * az
    pb0 = b0[0] * ax + b0[1] * ay + b0[2] * az
    pb1 = b1[0] * ax + b1[1] * ay + b1[2] * az
    pb2 = b2[0] * ax + b2[1] * ay + b2[2] * az
    lo_a = min(min(pa0, pa1), pa2) / scale
    hi_a = max(max(pa0, pa1), pa2) / scale
    lo_b = min(min(pb0, pb1), pb2) / scale
    hi_b = max(max(pb0, pb1), pb2) / scale
    return lo_b - hi_a > -margin or lo_a - hi_b > -margin


@njit(cache=True, inline="always", error_model="numpy")
def _tri_tri_one(a0, a1, a2, b0, b1, b2, margin):
    nx = ((a1[1] - a0[1]) * (a2[2] - a0[2])
          - (a1[2] - a0[2]) * (a2[1] - a0[1]))
    ny = ((a1[2] - a0[2]) * (a2[0] - a0[0])
          - (a1[0] - a0[0]) * (a2[2] - a0[2]))
    nz = ((a1[0] - a0[0]) * (a2[1] - a0[1])
          - (a1[1] - a0[1]) * (a2[0] - a0[0]))
    if _axis_separates(nx, ny, nz, a0, a1, a2, b0, b1, b2, margin):
        return False
    mx = ((b1[1] - b0[1]) * (b2[2] - b0[2])
          - (b1[2] - b0[2]) * (b2[1] - b0[1]))
    my = ((b1[2] - b0[2]) * (b2[0] - b0[0])
          - (b1[0] - b0[0]) * (b2[2] - b0[2]))
    mz = ((b1[0] - b0[0]) * (b2[1] - b0[1])
          - (b1[1] - b0[1]) * (b2[0] - b0[0]))
    if _axis_separates(mx, my, mz, a0, a1, a2, b0, b1, b2, margin):
        return False
    for i in range(3):
        if i == 0:
            ux = a1[0] - a0[0]
            uy = a1[1] - a0[1]
            uz = a1[2] - a0[2]
        elif i == 1:
            ux = a2[0] - a1[0]
            uy = a2[1] - a1[1]
            uz = a2[2] - a1[2]
        else:
            ux = a0[0] - a2[0]
            uy = a0[1] - a2[1]
            uz = a0[2] - a2[2]
        for j in range(3):
            if j == 0:
                vx = b1[0] - b0[0]
                vy = b1[1] - b0[1]
                vz = b1[2] - b0[2]
            elif j == 1:
                vx = b2[0] - b1[0]
                vy = b2[1] - b1[1]
                vz = b2[2] - b1[2]
            else:
                vx = b0[0] - b2[0]
                vy = b0[1] - b2[1]
                vz = b0[2] - b2[2]
            cx = uy * vz - uz * vy
            cy = uz * vx - ux * vz
            cz = ux * vy - uy * vx
            if _axis_separates(cx, cy, cz, a0, a1, a2, b0, b1, b2, margin):
                return False
    return True


@njit(cache=True, error_model="numpy")
def mesh_overlaps(verts_a, tris_a, margin, verts_b, tris_b,
                  bmin, bmax, left, right, start, count, order):
    if tris_a.shape[0] == 0 or tris_b.shape[0] == 0 or bmin.shape[0] == 0:
        return False
    stack = np.empty(STACK_DEPTH, dtype=np.int64)
    for ia in range(tris_a.shape[0]):
        a0 = verts_a[tris_a[ia, 0]]
        a1 = verts_a[tris_a[ia, 1]]
        a2 = verts_a[tris_a[ia, 2]]
        alo = np.empty(3)
        ahi = np.empty(3)
        for j in range(3):
            alo[j] = min(min(a0[j], a1[j]), a2[j]) - margin
            ahi[j] = max(max(a0[j], a1[j]), a2[j]) + margin
        top = 0
        stack[top] = 0
        top += 1
        while top > 0:
            top -= 1
            node = stack[top]
            miss = False
            for j in range(3):
                if bmin[node, j] > ahi[j] or bmax[node, j] < alo[j]:
                    miss = True
                    break
            if miss:
                continue
            if left[node] < 0:
                s = start[node]
                for jj in range(count[node]):
                    it = order[s + jj]
                    b0 = verts_b[tris_b[it, 0]]
                    b1 = verts_b[tris_b[it, 1]]
                    b2 = verts_b[tris_b[it, 2]]
                    if _tri_tri_one(a0, a1, a2, b0, b1, b2, margin):
                        return True
            else:
                stack[top] = left[node]
                top += 1
                stack[top] = right[node]
                top += 1
    return False


@njit(cache=True, error_model="numpy")
def fps(points, k, start):
    n = points.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = start
    d2 = np.empty(n)
    for i in range(n):
        dx = points[i, 0] - points[start, 0]
        dy = points[i, 1] - points[start, 1]
        dz = points[i, 2] - points[start, 2]
        d2[i] = dx * dx + dy * dy + dz * dz
    for c in range(1, k):
        best = 0
        best_d = d2[0]
        for i in range(1, n):
            if d2[i] > best_d:
                best_d = d2[i]
                best = i
        chosen[c] = best
        for i in range(n):
            dx = points[i, 0] - points[best, 0]
            dy = points[i, 1] - points[best, 1]
            dz = points[i, 2] - points[best, 2]
            nd = dx * dx + dy * dy + dz * dz
            if nd < d2[i]:
                d2[i] = nd
        d2[best] = 0.0
    return chosen


@njit(cache=True, error_model="numpy")
def ball_query(points, centroids, radius, cap):
    n = points.shape[0]
    kc = centroids.shape[0]
    idx = np.zeros((kc, cap), dtype=np.int64)
    counts = np.zeros(kc, dtype=np.int64)
    r2 = radius * radius
    buf_d = np.empty(cap)
    buf_i = np.empty(cap, dtype=np.int64)
    for c in range(kc):
        m = 0
        for i in range(n):
            dx = points[i, 0] - centroids[c, 0]
            dy = points[i, 1] - centroids[c, 1]
            dz = points[i, 2] - centroids[c, 2]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 > r2:
                continue
            if m < cap:
                j = m
                while j > 0 and (buf_d[j - 1] > d2
                                 or (buf_d[j - 1] == d2 and buf_i[j - 1] > i)):
                    buf_d[j] = buf_d[j - 1]
                    buf_i[j] = buf_i[j - 1]
                    j -= 1
                buf_d[j] = d2
                buf_i[j] = i
                m += 1
            elif (d2 < buf_d[cap - 1]
                  or (d2 == buf_d[cap - 1] and i < buf_i[cap - 1])):
                j = cap - 1
                while j > 0 and (buf_d[j - 1] > d2
                                 or (buf_d[j - 1] == d2 and buf_i[j - 1] > i)):
                    buf_d[j] = buf_d[j - 1]
                    buf_i[j] = buf_i[j - 1]
                    j -= 1
                buf_d[j] = d2
                buf_i[j] = i
        counts[c] = m
        for j in range(m):
            idx[c, j] = buf_i[j]
        for j in range(m, cap):
            idx[c, j] = buf_i[0] if m > 0 else 0
    return idx, counts


@njit(cache=True, error_model="numpy")
def three_nn(query, ref):
    nq = query.shape[0]
    nr = ref.shape[0]
    idx = np.zeros((nq, 3), dtype=np.int64)
    out = np.zeros((nq, 3))
    for q in range(nq):
        d0 = np.inf
        d1 = np.inf
        d2_ = np.inf
        i0 = -1
        i1 = -1
        i2 = -1
        for i in range(nr):
            dx = ref[i, 0] - query[q, 0]
            dy = ref[i, 1] - query[q, 1]
            dz = ref[i, 2] - query[q, 2]
            d = dx * dx + dy * dy + dz * dz
            if d < d0:
                d2_ = d1
                i2 = i1
                d1 = d0
                i1 = i0
                d0 = d
                i0 = i
            elif d < d1:
                d2_ = d1
                i2 = i1
                d1 = d
                i1 = i
            elif d < d2_:
                d2_ = d
                i2 = i
        if i1 < 0:
            d1 = d0
            i1 = i0
        if i2 < 0:
            d2_ = d0
            i2 = i0
        idx[q, 0] = i0
        idx[q, 1] = i1
        idx[q, 2] = i2
        out[q, 0] = d0
        out[q, 1] = d1
        out[q, 2] = d2_
    return idx, out
