"""Parallel-jaw gripper: collision boxes, scene collision, depth sweep.

The gripper is modeled as three oriented boxes (two fingers and a palm
bridge) in the grasp frame (r = closing axis, s = n x r, n = approach).
The fingertip plane sits at the grasp point offset by the approach depth,
q = p - d*n, and the finger bodies extend back along +n.
"""

from dataclasses import dataclass

import numpy as np

from ..grasp import Grasp

PERP_TOL = 1e-6


@dataclass(frozen=True)
class GripperModel:
    max_opening: float = 60.0
    finger_length: float = 50.0
    finger_thickness: float = 10.0
    palm_depth: float = 20.0

    def __post_init__(self):
        if self.max_opening <= 0:
            raise ValueError("max_opening must be positive")
        for name in ("finger_length", "finger_thickness", "palm_depth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def collision_boxes(self, grasp: Grasp):
        """Three (center, axes, half_extents) boxes in world coordinates.

        axes rows are the box axes (r, s, n); the boxes are symmetric
        about the closing axis r.
        """
        w = self.max_opening
        ft = self.finger_thickness
        fl = self.finger_length
        pd = self.palm_depth
        n = grasp.n
        r = grasp.r
        s = np.cross(n, r)
        q = grasp.p - grasp.d * n
        axes = np.ascontiguousarray(np.stack([r, s, n]))

        def box(local_center, half):
            c = (q + local_center[0] * r + local_center[1] * s
                 + local_center[2] * n)
            return (np.ascontiguousarray(c), axes,
                    np.asarray(half, dtype=np.float64))

        finger_half = (ft / 2.0, ft / 2.0, fl / 2.0)
        return [
            box((w / 2.0 + ft / 2.0, 0.0, fl / 2.0), finger_half),
            box((-(w / 2.0 + ft / 2.0), 0.0, fl / 2.0), finger_half),
            box((0.0, 0.0, fl + pd / 2.0), (w / 2.0 + ft, ft / 2.0, pd / 2.0)),
        ]


def collide(gripper: GripperModel, grasp: Grasp, scene) -> bool:
    """True iff any gripper collision box intersects any scene triangle."""
    for center, axes, half in gripper.collision_boxes(grasp):
        if scene.box_overlaps(center, axes, half):
            return True
    return False


def approach_sweep(scene, p, n, r, gripper: GripperModel, sweep_limit,
                   step=1.0, refine=0.1):
    """Deepest collision-free approach depth below the surface point.

    Sweeps depths from the standoff (depth 0) in `step` mm increments,
    then bisects the first colliding interval down to `refine` mm.
    Returns 0 if the standoff collides, sweep_limit if nothing ever does.
    """
    if sweep_limit <= 0:
        raise ValueError("sweep_limit must be positive")
    p = np.asarray(p, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if abs(float(n @ r)) > PERP_TOL:
        raise ValueError("opening vector must be perpendicular to approach")

    def collides(depth):
        return collide(gripper, Grasp(p, n, r, depth), scene)

    if collides(0.0):
        return 0.0
    free = 0.0
    depth = step
    hit = None
    while depth < sweep_limit - 1e-12:
        if collides(depth):
            hit = depth
            break
        free = depth
        depth += step
    if hit is None:
        if collides(sweep_limit):
            hit = sweep_limit
        else:
            return float(sweep_limit)
    lo, hi = free, hit
    while hi - lo > refine:
        mid = 0.5 * (lo + hi)
        if collides(mid):
            hi = mid
        else:
            lo = mid
    return float(lo)
