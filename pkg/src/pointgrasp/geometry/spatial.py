"""Spatial index over point clouds (kd-tree).

Backed by scipy's cKDTree; queries must agree exactly with a linear scan,
which the test suite enforces against a brute-force oracle.
"""

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud


class SpatialIndex:
    """kd-tree over a non-empty point cloud."""

    def __init__(self, cloud):
        pts = cloud.points if isinstance(cloud, PointCloud) \
            else np.asarray(cloud, dtype=np.float64)
        if pts.shape[0] == 0:
            raise ValueError("cannot index an empty cloud")
        self.points = pts
        self._tree = cKDTree(pts)

    def nearest_within(self, queries, radius):
        """Index of the nearest point within radius per query, -1 if none."""
        q = np.asarray(queries, dtype=np.float64).reshape(-1, 3)
        dist, idx = self._tree.query(q, k=1, distance_upper_bound=radius)
        idx = np.asarray(idx, dtype=np.int64)
        idx[~np.isfinite(dist)] = -1
        return idx

    def query_ball(self, query, radius):
        """All indices within radius of a single query point."""
        return np.asarray(
            self._tree.query_ball_point(np.asarray(query, dtype=np.float64),
                                        radius),
            dtype=np.int64)


def radius_nearest(index, query, radius):
    """Nearest point id within radius, or None."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    out = index.nearest_within(np.asarray(query, dtype=np.float64), radius)
    i = int(out[0])
    return None if i < 0 else i
