"""Preprocessing, the per-point network, masked losses, training, prediction."""

from .losses import LossBreakdown, loss_and_grad, loss_from_heads
from .network import (HeadOutputs, NetworkConfig, SALevel, backward,
                      desk_config, forward, heads_from_raw, init_params,
                      paper_config)
from .predict import (CATEGORY_THRESHOLD, PredictedGrasp, approach_distance,
                      cloud_sweep_depth, predict)
from .preprocess import PreprocessConfig, preprocess
from .train import (Checkpoint, TrainConfig, load_checkpoint,
                    make_checkpoint, save_checkpoint, split_dataset, train)

__all__ = [
    "CATEGORY_THRESHOLD", "Checkpoint", "HeadOutputs", "LossBreakdown",
    "NetworkConfig", "PredictedGrasp", "PreprocessConfig", "SALevel",
    "TrainConfig", "approach_distance", "backward", "cloud_sweep_depth",
    "desk_config", "forward", "heads_from_raw", "init_params",
    "load_checkpoint", "loss_and_grad", "loss_from_heads",
    "make_checkpoint", "paper_config", "predict", "preprocess",
    "save_checkpoint", "split_dataset", "train",
]
