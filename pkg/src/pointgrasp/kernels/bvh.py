"""Axis-aligned BVH construction over triangle soups.

Median splits on the widest centroid axis, deterministic ordering
(ties broken by triangle id).  The flattened arrays are consumed by both
kernel backends; construction itself is not a hot path.
"""

import numpy as np

LEAF_SIZE = 4


def build_bvh(verts, tris, leaf_size=LEAF_SIZE):
    """Returns (bmin, bmax, left, right, start, count, order) arrays.

    left < 0 marks a leaf whose triangles are order[start:start+count].
    Zero triangles produce zero nodes.
    """
    nt = tris.shape[0]
    if nt == 0:
        z3 = np.zeros((0, 3))
        zi = np.zeros(0, dtype=np.int64)
        return z3, z3.copy(), zi, zi.copy(), zi.copy(), zi.copy(), zi.copy()

    tv = verts[tris]                      # (T,3,3)
    tri_lo = tv.min(axis=1)
    tri_hi = tv.max(axis=1)
    cent = tv.mean(axis=1)

    order = np.arange(nt, dtype=np.int64)
    bmin = []
    bmax = []
    left = []
    right = []
    start = []
    count = []

    # (lo, hi, slot); slot -1 means root, else parent child link to patch
    stack = [(0, nt, -1, False)]
    while stack:
        lo, hi, parent, is_left = stack.pop()
        node = len(bmin)
        seg = order[lo:hi]
        bmin.append(tri_lo[seg].min(axis=0))
        bmax.append(tri_hi[seg].max(axis=0))
        left.append(-1)
        right.append(-1)
        start.append(lo)
        count.append(hi - lo)
        if parent >= 0:
            if is_left:
                left[parent] = node
            else:
                right[parent] = node
        if hi - lo > leaf_size:
            c = cent[seg]
            axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
            key = np.lexsort((seg, c[:, axis]))
            order[lo:hi] = seg[key]
            mid = (lo + hi) // 2
            left[node] = -2            # placeholder, patched by children
            # push right first so left is processed (and numbered) first
            stack.append((mid, hi, node, False))
            stack.append((lo, mid, node, True))

    return (np.asarray(bmin), np.asarray(bmax),
            np.asarray(left, dtype=np.int64),
            np.asarray(right, dtype=np.int64),
            np.asarray(start, dtype=np.int64),
            np.asarray(count, dtype=np.int64),
            order)
