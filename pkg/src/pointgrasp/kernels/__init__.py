"""Hot numeric kernels with selectable backend.

``pointgrasp.backend`` picks numba or numpy at import time; see that
module for the ``POINTGRASP_BACKEND`` environment flag.  All callers go
through the names re-exported here.
"""

from .. import backend
from .bvh import build_bvh

if backend.ACTIVE == "numba":
    from . import numba_impl as _impl
else:
    from . import numpy_impl as _impl

raycast_nearest = _impl.raycast_nearest
line_extremes = _impl.line_extremes
box_overlaps = _impl.box_overlaps
mesh_overlaps = _impl.mesh_overlaps
fps = _impl.fps
ball_query = _impl.ball_query
three_nn = _impl.three_nn

__all__ = [
    "build_bvh",
    "raycast_nearest",
    "line_extremes",
    "box_overlaps",
    "mesh_overlaps",
    "fps",
    "ball_query",
    "three_nn",
]
