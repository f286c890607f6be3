"""Triangle-mesh kernel: sampling, spatial queries, rendering, collision."""

from .camera import CameraIntrinsics, backproject, render_depth
from .cloud import PointCloud
from .gripper import GripperModel, approach_sweep, collide
from .mesh import (MassProperties, MeshSet, TriMesh, load_mesh, make_bowl,
                   make_box, make_cylinder, make_sphere, mass_properties,
                   primitive_from_spec, sample_surface, save_stl)
from .spatial import SpatialIndex, radius_nearest
from .transforms import RigidTransform, orthonormal_tangents, rotate_about_axis

__all__ = [
    "CameraIntrinsics", "GripperModel", "MassProperties", "MeshSet",
    "PointCloud", "RigidTransform", "SpatialIndex", "TriMesh",
    "approach_sweep", "backproject", "collide", "load_mesh", "make_bowl",
    "make_box", "make_cylinder", "make_sphere", "mass_properties",
    "orthonormal_tangents", "primitive_from_spec", "radius_nearest",
    "render_depth", "rotate_about_axis", "sample_surface", "save_stl",
]
