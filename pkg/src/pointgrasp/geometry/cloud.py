"""Point clouds (mm) with optional unit normals."""

import numpy as np

NORMAL_TOL = 1e-6


class PointCloud:
    def __init__(self, points, normals=None):
        p = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
        if p.ndim != 2 or p.shape[1] != 3:
            raise ValueError("points must be (N,3)")
        if not np.all(np.isfinite(p)):
            raise ValueError("points contain non-finite values")
        self.points = p
        if normals is not None:
            n = np.ascontiguousarray(np.asarray(normals, dtype=np.float64))
            if n.shape != p.shape:
                raise ValueError("normals shape must match points")
            lens = np.linalg.norm(n, axis=1)
            if n.shape[0] and np.any(np.abs(lens - 1.0) > NORMAL_TOL):
                raise ValueError("normals must be unit length")
            self.normals = n
        else:
            self.normals = None

    def __len__(self):
        return self.points.shape[0]
