"""Per-point labels and masks, and the training-sample binary format.

Label layout per point (8 floats):  [nx ny nz rx ry rz category score].
Mask layout per point (4 bytes):    [m_normal m_rotation m_category m_score].

Emitted mask patterns:
    0 0 0 0   object point, supervision unknown
    0 0 1 0   ground point (category supervised to 0)
    1 1 1 1   appended positive grasp point
    1 0 1 1   appended negative grasp point
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from ..geometry.cloud import PointCloud
from ..geometry.spatial import SpatialIndex

MASK_UNKNOWN = (0, 0, 0, 0)
MASK_GROUND = (0, 0, 1, 0)
MASK_POSITIVE = (1, 1, 1, 1)
MASK_NEGATIVE = (1, 0, 1, 1)


@dataclass
class TrainingSample:
    points: np.ndarray            # (N,3) mm
    labels: np.ndarray            # (N,8)
    masks: np.ndarray             # (N,4) uint8
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.points.shape[0]
        if self.labels.shape != (n, 8) or self.masks.shape != (n, 4):
            raise ValueError("points/labels/masks lengths disagree")


def assign_labels(cap, pos_points, pos_grasps, pos_scores,
                  neg_points, neg_normals, query_radius=1.0, meta=None):
    """Attach labels/masks to a capture and append matched grasp points.

    cap: a Capture (cloud + per-point source).  Planned points with no
    cloud neighbor within query_radius are dropped.
    """
    base_pts = cap.cloud.points
    n = base_pts.shape[0]
    labels = np.zeros((n, 8))
    masks = np.zeros((n, 4), dtype=np.uint8)
    masks[cap.source == 0] = MASK_GROUND

    index = SpatialIndex(cap.cloud)
    add_pts = []
    add_lab = []
    add_msk = []
    matched_pos = []
    pos_points = np.asarray(pos_points, dtype=np.float64).reshape(-1, 3)
    for i in range(pos_points.shape[0]):
        if index.nearest_within(pos_points[i], query_radius)[0] < 0:
            continue
        g = pos_grasps[i]
        add_pts.append(pos_points[i])
        add_lab.append(np.concatenate([g.n, g.r, [1.0, pos_scores[i]]]))
        add_msk.append(MASK_POSITIVE)
        matched_pos.append(i)
    matched_neg = []
    neg_points = np.asarray(neg_points, dtype=np.float64).reshape(-1, 3)
    neg_normals = np.asarray(neg_normals, dtype=np.float64).reshape(-1, 3)
    for i in range(neg_points.shape[0]):
        if index.nearest_within(neg_points[i], query_radius)[0] < 0:
            continue
        add_pts.append(neg_points[i])
        add_lab.append(np.concatenate([neg_normals[i],
                                       [0.0, 0.0, 0.0, 0.0, 0.0]]))
        add_msk.append(MASK_NEGATIVE)
        matched_neg.append(i)

    if add_pts:
        points = np.concatenate([base_pts, np.asarray(add_pts)])
        labels = np.concatenate([labels, np.asarray(add_lab)])
        masks = np.concatenate([masks,
                                np.asarray(add_msk, dtype=np.uint8)])
    else:
        points = base_pts
    out_meta = dict(meta or {})
    out_meta.update(n_base=int(n), matched_positive=matched_pos,
                    matched_negative=matched_neg)
    return TrainingSample(points, labels, masks, out_meta)


# ---------------------------------------------------------------------------
# sample binary format: magic "PNGD", little-endian

_MAGIC = b"PNGD"
_VERSION = 1


def write_sample(sample: TrainingSample, path):
    n = sample.points.shape[0]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, n))
        fh.write(sample.points.astype("<f4").tobytes())
        fh.write(sample.labels.astype("<f4").tobytes())
        fh.write(sample.masks.astype(np.uint8).tobytes())


def read_sample(path):
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path} is not a training-sample file")
        version, n = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ValueError(f"unsupported sample version {version}")
        pts = np.frombuffer(fh.read(n * 12), dtype="<f4").reshape(n, 3)
        lab = np.frombuffer(fh.read(n * 32), dtype="<f4").reshape(n, 8)
        msk = np.frombuffer(fh.read(n * 4), dtype=np.uint8).reshape(n, 4)
    return TrainingSample(pts.astype(np.float64), lab.astype(np.float64),
                          msk.copy())
