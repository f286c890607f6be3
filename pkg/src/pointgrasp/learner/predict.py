"""End-to-end grasp prediction from a raw point cloud.

Points inside the prediction window are preprocessed (jitter off),
pushed through the network, thresholded on the category probability, and
turned into grasps: the approach is the predicted normal, the opening
direction is the predicted rotation re-orthogonalized against it, and the
depth comes from sweeping the gripper silhouette against the cloud.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, EmptyInput
from ..geometry.gripper import GripperModel
from ..grasp import Grasp
from .network import forward, heads_from_raw
from .preprocess import PreprocessConfig, preprocess

CATEGORY_THRESHOLD = 0.573
PRED_CROP_HALF_MM = 200.0
D_MAX = 40.0
DEGENERATE_EPS = 1e-8


def approach_distance(d_deepest, d_max=D_MAX):
    """Clamp the deepest approach to the gripper's working depth."""
    if d_deepest < 0:
        raise DomainError("approach depth must be non-negative")
    return min(float(d_deepest), float(d_max))


def cloud_sweep_depth(point, n, r, points, gripper: GripperModel):
    """Deepest approach before cloud points obstruct the fingers or palm.

    Measured as the smallest positive depth (along -n from the grasp
    point) of any cloud point inside the swept finger columns, or the
    palm band depth plus the finger length.  Unobstructed sweeps return
    +inf (callers clamp with approach_distance).
    """
    s = np.cross(n, r)
    rel = points - point
    a = -(rel @ n)                  # depth below the grasp point
    b = rel @ r
    c = rel @ s
    w2 = gripper.max_opening / 2.0
    ft = gripper.finger_thickness
    lateral = np.abs(c) <= ft / 2.0
    below = a > 1e-9
    finger = lateral & below & (np.abs(b) >= w2) \
        & (np.abs(b) <= w2 + ft)
    depths = []
    if np.any(finger):
        depths.append(float(a[finger].min()))
    palm = lateral & below & (np.abs(b) < w2)
    if np.any(palm):
        depths.append(float(a[palm].min()) + gripper.finger_length)
    return min(depths) if depths else np.inf


@dataclass
class PredictedGrasp:
    grasp: Grasp
    score: float                 # predicted quality (P_score)
    category_prob: float
    source_index: int            # row in the original cloud


def predict(cloud, checkpoint, threshold=CATEGORY_THRESHOLD,
            crop_half_extent=PRED_CROP_HALF_MM, gripper=None,
            d_max=D_MAX, pre_cfg=None, resample_seed=0):
    """Ranked grasp predictions for a world-frame cloud (mm).

    Returns a list sorted by predicted score descending; empty when no
    point clears the category threshold.
    """
    pts = cloud.points if hasattr(cloud, "points") \
        else np.asarray(cloud, dtype=np.float64)
    if pts.shape[0] == 0:
        raise EmptyInput("empty cloud")
    gripper = gripper or GripperModel()
    keep = (np.abs(pts[:, 0]) <= crop_half_extent) \
        & (np.abs(pts[:, 1]) <= crop_half_extent)
    pts = pts[keep]
    if pts.shape[0] == 0:
        raise EmptyInput("no points inside the prediction window")
    src_rows = np.nonzero(keep)[0]

    cfg = checkpoint.config
    pre_cfg = pre_cfg or PreprocessConfig(target_count=cfg.n_points,
                                          jitter=False)
    if pre_cfg.jitter:
        pre_cfg = PreprocessConfig(pre_cfg.scale_m, pre_cfg.jitter_sigma_mm,
                                   False, pre_cfg.target_count)
    scaled, idx_map, _ = preprocess(pts, pre_cfg,
                                    np.random.default_rng(resample_seed))
    _, raw9, _ = forward(cfg, checkpoint.params_f64(), scaled)
    heads = heads_from_raw(raw9)

    # first occurrence per source point (resampling may duplicate rows)
    first = {}
    for row, src in enumerate(idx_map):
        if int(src) not in first:
            first[int(src)] = row
    out = []
    for src, row in first.items():
        prob = float(heads.category[row])
        if prob < threshold:
            continue
        n = heads.normal[row]
        rot = heads.rotation[row]
        proj = rot - float(rot @ n) * n
        plen = float(np.linalg.norm(proj))
        if plen < DEGENERATE_EPS:
            continue
        r = proj / plen
        p = pts[src]
        d_deep = cloud_sweep_depth(p, n, r, pts, gripper)
        d = approach_distance(d_deep if np.isfinite(d_deep) else d_max,
                              d_max)
        out.append(PredictedGrasp(Grasp(p, n, r, d),
                                  float(heads.score[row]), prob,
                                  int(src_rows[src])))
    out.sort(key=lambda pg: (-pg.score, pg.source_index))
    return out
