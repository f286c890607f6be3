"""Camera randomization and point-cloud capture for composed scenes."""

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyCapture
from ..geometry.camera import CameraIntrinsics, backproject, render_depth
from ..geometry.cloud import PointCloud
from ..geometry.transforms import RigidTransform


@dataclass(frozen=True)
class CameraBands:
    """Sampling bands for the randomized camera (mm / degrees)."""

    radius: tuple = (400.0, 800.0)
    elevation_deg: tuple = (30.0, 80.0)


@dataclass(frozen=True)
class CameraState:
    pose: RigidTransform          # camera-to-world
    intrinsics: CameraIntrinsics


def randomize_camera(center, seed, bands: CameraBands = CameraBands(),
                     intrinsics: CameraIntrinsics | None = None):
    """Random viewpoint with the optical axis aimed exactly at center.

    Draw order per call: radius, elevation, azimuth, roll (all uniform in
    their bands).  Deterministic for a given seed.
    """
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    if intrinsics is None:
        intrinsics = CameraIntrinsics.default()
    center = np.asarray(center, dtype=np.float64)
    radius = rng.uniform(*bands.radius)
    elev = np.radians(rng.uniform(*bands.elevation_deg))
    azim = rng.uniform(0.0, 2.0 * np.pi)
    roll = rng.uniform(0.0, 2.0 * np.pi)
    pos = center + radius * np.array([np.cos(elev) * np.cos(azim),
                                      np.cos(elev) * np.sin(azim),
                                      np.sin(elev)])
    fwd = center - pos
    fwd = fwd / np.linalg.norm(fwd)
    right = np.cross(fwd, np.array([0.0, 0.0, 1.0]))
    right = right / np.linalg.norm(right)
    up = np.cross(fwd, right)
    cr, sr = np.cos(roll), np.sin(roll)
    x_cam = cr * right + sr * up
    y_cam = -sr * right + cr * up
    rot = np.column_stack([x_cam, y_cam, fwd])
    return CameraState(RigidTransform(rot, pos), intrinsics)


@dataclass
class Capture:
    """World-frame cropped capture with per-point mesh provenance.

    source[i] is 0 for ground points and k+1 for points on placed object
    k, matching SceneSpec.meshset ordering.
    """

    cloud: PointCloud
    source: np.ndarray
    pixel: np.ndarray


def capture(scene, cam: CameraState, crop_half_extent=100.0):
    """Render, backproject to world, crop to the totebox window."""
    depth, tri, source = render_depth(scene.meshset, cam.pose,
                                      cam.intrinsics)
    pts_cam, pix = backproject(depth, cam.intrinsics)
    pts = cam.pose.apply(pts_cam)
    src = source.reshape(-1)[pix]
    keep = (np.abs(pts[:, 0]) <= crop_half_extent) \
        & (np.abs(pts[:, 1]) <= crop_half_extent)
    if not np.any(keep):
        raise EmptyCapture("no points survive the capture crop")
    return Capture(PointCloud(pts[keep]), src[keep], pix[keep])
