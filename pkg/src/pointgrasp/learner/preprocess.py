"""Point-cloud preprocessing: center, scale, jitter, resample.

Coordinates are centered on their mean, optionally jittered with Gaussian
noise (sigma in mm, training only), scaled by the metric factor, and
resampled to a fixed point count.  The returned index map traces every
output point to its source row so labels and masks can follow.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput


@dataclass(frozen=True)
class PreprocessConfig:
    scale_m: float = 0.33          # metric scale factor, meters
    jitter_sigma_mm: float = 1.0
    jitter: bool = True
    target_count: int = 8192

    def __post_init__(self):
        if self.scale_m <= 0:
            raise ValueError("scale must be positive")
        if self.target_count < 1:
            raise ValueError("target count must be at least 1")


def preprocess(points, cfg: PreprocessConfig, rng):
    """Returns (scaled (target,3), index_map (target,), centroid (3,)).

    Jitter is applied in mm before scaling, which is equivalent to
    jittering the scaled coordinates with sigma/scale.  Resampling is
    uniform without replacement when enough points exist, with
    replacement otherwise.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = pts.shape[0]
    if n == 0:
        raise EmptyInput("cannot preprocess an empty cloud")
    rng = rng if isinstance(rng, np.random.Generator) \
        else np.random.default_rng(rng)
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    if cfg.jitter and cfg.jitter_sigma_mm > 0:
        centered = centered + rng.normal(0.0, cfg.jitter_sigma_mm,
                                         size=centered.shape)
    scaled = centered / (cfg.scale_m * 1000.0)
    target = cfg.target_count
    if n >= target:
        index_map = rng.choice(n, size=target, replace=False)
    else:
        index_map = rng.choice(n, size=target, replace=True)
    index_map = np.asarray(index_map, dtype=np.int64)
    return np.ascontiguousarray(scaled[index_map]), index_map, centroid
