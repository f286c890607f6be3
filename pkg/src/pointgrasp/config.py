"""Strict JSON config files mirroring the runtime config dataclasses.

Every section key must name a known config type and every field must be
a declared dataclass field; unknown keys fail fast.
"""

import dataclasses
import json

from .errors import ConfigError
from .evaluation import MatchCriterion
from .geometry.camera import CameraIntrinsics
from .geometry.gripper import GripperModel
from .learner.network import NetworkConfig, SALevel, desk_config, paper_config
from .learner.preprocess import PreprocessConfig
from .learner.train import TrainConfig
from .planner import PlannerConfig
from .quality import QualityConfig
from .scenegen.capture import CameraBands
from .scenegen.dataset import DatasetConfig


def _build(cls, data, section):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(
            f"unknown keys in [{section}]: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [{section}] config: {exc}") from exc


def _build_network(data):
    data = dict(data)
    preset = data.pop("preset", None)
    n_points = data.pop("n_points", None)
    if preset is not None:
        if data:
            raise ConfigError(
                f"network preset does not take extra keys: {sorted(data)}")
        maker = {"desk": desk_config, "paper": paper_config}.get(preset)
        if maker is None:
            raise ConfigError(f"unknown network preset {preset!r}")
        return maker(n_points) if n_points else maker()
    if "sa_levels" in data:
        data["sa_levels"] = tuple(
            SALevel(int(k), float(r), tuple(w))
            for k, r, w in data["sa_levels"])
    if "fp_widths" in data:
        data["fp_widths"] = tuple(tuple(w) for w in data["fp_widths"])
    if n_points:
        data["n_points"] = int(n_points)
    return _build(NetworkConfig, data, "network")


_SECTIONS = {
    "planner": lambda d: _build(PlannerConfig, d, "planner"),
    "quality": lambda d: _build(QualityConfig, d, "quality"),
    "gripper": lambda d: _build(GripperModel, d, "gripper"),
    "dataset": lambda d: _build(DatasetConfig, d, "dataset"),
    "camera": lambda d: _build(CameraIntrinsics, d, "camera"),
    "camera_bands": lambda d: _build(CameraBands, d, "camera_bands"),
    "preprocess": lambda d: _build(PreprocessConfig, d, "preprocess"),
    "network": _build_network,
    "train": lambda d: _build(TrainConfig, d, "train"),
    "match": lambda d: _build(MatchCriterion, d, "match"),
}


def load_config(path):
    """Parse a config file into a dict of built config objects."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    out = {}
    for key, data in raw.items():
        if "bands" in key:
            data = {k: tuple(v) if isinstance(v, list) else v
                    for k, v in data.items()}
        out[key] = _SECTIONS[key](data)
    return out
