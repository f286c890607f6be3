"""Pinhole depth camera: exact ray-cast rendering and backprojection.

Depth is the distance along the optical (+z camera) axis, not the ray
length, so a fronto-parallel plane renders at constant depth.  Rays are
cast with unnormalized directions of unit camera-z so the intersection
parameter equals the depth directly.
"""

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must be inside the image")

    @staticmethod
    def default(width=640, height=480, fov_deg=60.0):
        """Square-pixel intrinsics from a horizontal field of view."""
        fx = width / (2.0 * np.tan(np.radians(fov_deg) / 2.0))
        return CameraIntrinsics(fx, fx, (width - 1) / 2.0,
                                (height - 1) / 2.0, width, height)

    def pixel_rays(self):
        """Camera-frame ray directions with z=1, shape (H*W, 3)."""
        u = np.arange(self.width, dtype=np.float64)
        v = np.arange(self.height, dtype=np.float64)
        uu, vv = np.meshgrid(u, v)
        return np.stack([(uu - self.cx) / self.fx,
                         (vv - self.cy) / self.fy,
                         np.ones_like(uu)], axis=-1).reshape(-1, 3)


def render_depth(scene, pose, intrinsics):
    """Ray-cast depth image: (depth, tri, source), misses are +inf / -1.

    scene is a MeshSet, pose the camera-to-world transform.
    """
    h, w = intrinsics.height, intrinsics.width
    dirs = pose.apply_vector(intrinsics.pixel_rays())
    origins = np.broadcast_to(pose.translation, dirs.shape)
    t, tri = scene.raycast(np.ascontiguousarray(origins),
                           np.ascontiguousarray(dirs), t_min=1e-9)
    depth = t.reshape(h, w)
    tri = tri.reshape(h, w)
    if scene.source.shape[0]:
        source = np.where(tri >= 0, scene.source[np.maximum(tri, 0)], -1)
    else:
        source = np.full_like(tri, -1)
    return depth, tri, source


def backproject(depth, intrinsics):
    """Invert the pinhole model: camera-frame points for valid pixels.

    Returns (points (N,3), pixel_index (N,)) where pixel_index is the flat
    row-major pixel id, enabling provenance lookups.
    """
    h, w = intrinsics.height, intrinsics.width
    if depth.shape != (h, w):
        raise ValueError("depth shape does not match intrinsics")
    flat = depth.reshape(-1)
    valid = np.isfinite(flat)
    idx = np.nonzero(valid)[0]
    z = flat[idx]
    u = (idx % w).astype(np.float64)
    v = (idx // w).astype(np.float64)
    x = (u - intrinsics.cx) / intrinsics.fx * z
    y = (v - intrinsics.cy) / intrinsics.fy * z
    return np.column_stack([x, y, z]), idx


def cloud_from_depth(depth, intrinsics, pose):
    """World-frame PointCloud of all valid pixels."""
    pts_cam, idx = backproject(depth, intrinsics)
    return PointCloud(pose.apply(pts_cam)), idx
