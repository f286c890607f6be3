"""Masked per-point losses and their gradients.

Four components gated by per-point binary masks and divided by the total
input point count M:

    score     (P_score - L_score)^2
    category  binary cross-entropy on the 2-way softmax (standard sign)
    normal    1 - L_normal . P_normal
    rotation  1 - (L_rotation . normalize(proj))^2,
              proj = P_rotation - (P_rotation . L_normal) L_normal

The rotation term is invariant under P_rotation -> -P_rotation (gripper
symmetry).  A rotation-masked point whose prediction is parallel to the
label normal has no usable projection: its rotation term is set to 1 with
zero gradient and counted in the breakdown diagnostics.
"""

from dataclasses import dataclass

import numpy as np

DEGENERATE_EPS = 1e-8
NORM_EPS = 1e-12


@dataclass
class LossBreakdown:
    score: float
    category: float
    normal: float
    rotation: float
    total: float
    m_pts: int
    degenerate_projections: int = 0


def loss_from_heads(heads, labels, masks):
    """Spec-facing loss on finished head outputs (no gradients).

    heads carries the category probability and already-normalized normal
    and rotation vectors.
    """
    labels = np.asarray(labels, dtype=np.float64)
    masks = np.asarray(masks, dtype=np.float64)
    m = labels.shape[0]
    l_n = labels[:, 0:3]
    l_r = labels[:, 3:6]
    l_c = labels[:, 6]
    l_s = labels[:, 7]

    score = ((heads.score - l_s) ** 2 * masks[:, 3]).sum() / m
    p = np.clip(heads.category, 1e-12, 1.0 - 1e-12)
    cat = (-(l_c * np.log(p) + (1.0 - l_c) * np.log(1.0 - p))
           * masks[:, 2]).sum() / m
    normal = ((1.0 - np.einsum("ij,ij->i", l_n, heads.normal))
              * masks[:, 0]).sum() / m

    proj = heads.rotation - np.einsum("ij,ij->i", heads.rotation,
                                      l_n)[:, None] * l_n
    pnorm = np.linalg.norm(proj, axis=1)
    degen = (pnorm < DEGENERATE_EPS) & (masks[:, 1] > 0)
    safe = np.maximum(pnorm, NORM_EPS)
    cosr = np.einsum("ij,ij->i", l_r, proj / safe[:, None])
    rot_term = np.where(degen, 1.0, 1.0 - cosr ** 2)
    rot = (rot_term * masks[:, 1]).sum() / m

    total = score + cat + normal + rot
    return LossBreakdown(float(score), float(cat), float(normal),
                         float(rot), float(total), m,
                         int(np.count_nonzero(degen)))


def loss_and_grad(raw9, labels, masks):
    """Loss breakdown plus d(total)/d(raw9) for training.

    raw9 is the pre-split 9-channel network output; the normalization and
    projection paths are differentiated here.
    """
    raw9 = np.asarray(raw9, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    masks = np.asarray(masks, dtype=np.float64)
    m = raw9.shape[0]
    d = np.zeros_like(raw9)
    l_n = labels[:, 0:3]
    l_r = labels[:, 3:6]
    l_c = labels[:, 6]
    l_s = labels[:, 7]

    # score: plain masked squared error on the raw channel
    z_s = raw9[:, 0]
    ms = masks[:, 3]
    score = float(((z_s - l_s) ** 2 * ms).sum() / m)
    d[:, 0] = 2.0 * (z_s - l_s) * ms / m

    # category: 2-way softmax == sigmoid of the logit difference
    a = raw9[:, 2] - raw9[:, 1]
    mc = masks[:, 2]
    cat = float(((np.logaddexp(0.0, a) - l_c * a) * mc).sum() / m)
    p = 1.0 / (1.0 + np.exp(-a))
    da = (p - l_c) * mc / m
    d[:, 2] += da
    d[:, 1] -= da

    # normal: cosine distance through the normalization
    z_n = raw9[:, 3:6]
    zn_len = np.maximum(np.linalg.norm(z_n, axis=1), NORM_EPS)
    u_n = z_n / zn_len[:, None]
    mn = masks[:, 0]
    normal = float(((1.0 - np.einsum("ij,ij->i", l_n, u_n)) * mn).sum() / m)
    # d/dz (1 - l.u) = -(I - u u^T) l / |z|
    coef = mn / m
    proj_l = l_n - np.einsum("ij,ij->i", l_n, u_n)[:, None] * u_n
    d[:, 3:6] += -proj_l / zn_len[:, None] * coef[:, None]

    # rotation: squared cosine through normalize -> project -> normalize
    z_r = raw9[:, 6:9]
    zr_len = np.maximum(np.linalg.norm(z_r, axis=1), NORM_EPS)
    v = z_r / zr_len[:, None]
    mr = masks[:, 1]
    proj = v - np.einsum("ij,ij->i", v, l_n)[:, None] * l_n
    pnorm = np.linalg.norm(proj, axis=1)
    degen = (pnorm < DEGENERATE_EPS) & (mr > 0)
    safe = np.maximum(pnorm, NORM_EPS)
    u_p = proj / safe[:, None]
    c = np.einsum("ij,ij->i", l_r, u_p)
    rot_term = np.where(degen, 1.0, 1.0 - c ** 2)
    rot = float((rot_term * mr).sum() / m)
    # chain: d(1-c^2)/du_p = -2c l_r ; through both normalizations
    live = mr / m * (~degen)
    dup = -2.0 * c[:, None] * l_r * live[:, None]
    dproj = (dup - np.einsum("ij,ij->i", dup, u_p)[:, None] * u_p) \
        / safe[:, None]
    dv = dproj - np.einsum("ij,ij->i", dproj, l_n)[:, None] * l_n
    dz_r = (dv - np.einsum("ij,ij->i", dv, v)[:, None] * v) \
        / zr_len[:, None]
    d[:, 6:9] += dz_r

    total = score + cat + normal + rot
    breakdown = LossBreakdown(score, cat, normal, rot, float(total), m,
                              int(np.count_nonzero(degen)))
    return breakdown, d
