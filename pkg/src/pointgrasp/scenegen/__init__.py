"""Scene composition, camera capture and training-sample generation."""

from .capture import CameraBands, CameraState, Capture, capture, randomize_camera
from .dataset import (DatasetConfig, FilterResult, generate_dataset,
                      scene_grasp_filter, simulate_one)
from .labels import (MASK_GROUND, MASK_NEGATIVE, MASK_POSITIVE, MASK_UNKNOWN,
                     TrainingSample, assign_labels, read_sample, write_sample)
from .scene import PlacedObject, SceneSpec, compose_scene, ground_mesh, stable_orientations

__all__ = [
    "CameraBands", "CameraState", "Capture", "DatasetConfig", "FilterResult",
    "MASK_GROUND", "MASK_NEGATIVE", "MASK_POSITIVE", "MASK_UNKNOWN",
    "PlacedObject", "SceneSpec", "TrainingSample", "assign_labels",
    "capture", "compose_scene", "generate_dataset", "ground_mesh",
    "randomize_camera", "read_sample", "scene_grasp_filter", "simulate_one",
    "stable_orientations", "write_sample",
]
