"""Stochastic gradient descent training and checkpoint persistence.

Plain SGD with momentum and L2 weight decay (weights only, not biases) at
a fixed learning rate.  Parameters are held in float64 during training
and quantized to float32 in checkpoints; forward passes upcast, so a
saved-then-loaded checkpoint reproduces its outputs bit for bit.
"""

import json
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import NonFiniteLoss
from .losses import loss_and_grad
from .network import NetworkConfig, SALevel, backward, forward, init_params
from .preprocess import PreprocessConfig, preprocess


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    momentum: float = 0.9
    weight_decay: float = 2.0 ** -5
    epochs: int = 200
    batch_size: int = 4
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs < 0:
            raise ValueError("bad learning rate or epoch count")
        if not 0.0 < self.train_fraction <= 1.0:
            raise ValueError("train fraction must be in (0, 1]")


@dataclass
class Checkpoint:
    config: NetworkConfig
    params: dict                       # name -> float32 ndarray
    meta: dict = field(default_factory=dict)

    def params_f64(self):
        return {k: v.astype(np.float64) for k, v in self.params.items()}


def make_checkpoint(cfg, params, meta=None):
    return Checkpoint(cfg, {k: np.ascontiguousarray(v, dtype=np.float32)
                            for k, v in params.items()}, dict(meta or {}))


def split_dataset(n, train_fraction, seed):
    """Deterministic 80/20-style split by sample index."""
    order = np.random.default_rng(seed).permutation(n)
    k = max(1, int(round(n * train_fraction))) if n else 0
    return np.sort(order[:k]), np.sort(order[k:])


def _sample_arrays(sample):
    return (np.asarray(sample.points, dtype=np.float64),
            np.asarray(sample.labels, dtype=np.float64),
            np.asarray(sample.masks, dtype=np.float64))


def train(samples, net_cfg: NetworkConfig, train_cfg: TrainConfig,
          pre_cfg: PreprocessConfig | None = None, callback=None):
    """Train on TrainingSample objects; returns (Checkpoint, train_idx,
    test_idx).

    Every epoch re-preprocesses each sample (jitter + resample) with an
    rng derived from (seed, epoch, sample index), so runs are
    reproducible and independent of batch layout.
    """
    if not samples:
        raise ValueError("no training samples")
    pre_cfg = pre_cfg or PreprocessConfig(target_count=net_cfg.n_points)
    if pre_cfg.target_count != net_cfg.n_points:
        raise ValueError("preprocess target must match the network input")
    train_idx, test_idx = split_dataset(
        len(samples), train_cfg.train_fraction, train_cfg.seed)
    params = init_params(net_cfg, seed=train_cfg.seed)
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    lr = train_cfg.learning_rate
    mom = train_cfg.momentum
    wd = train_cfg.weight_decay
    history = []
    arrays = {int(i): _sample_arrays(samples[int(i)]) for i in train_idx}

    for epoch in range(train_cfg.epochs):
        order = np.random.default_rng(
            np.random.SeedSequence(entropy=train_cfg.seed,
                                   spawn_key=(2, epoch))).permutation(
            np.asarray(train_idx))
        epoch_losses = []
        for b0 in range(0, len(order), train_cfg.batch_size):
            batch = order[b0:b0 + train_cfg.batch_size]
            gsum = None
            bloss = 0.0
            for si in batch:
                pts, lab, msk = arrays[int(si)]
                rng = np.random.default_rng(np.random.SeedSequence(
                    entropy=train_cfg.seed, spawn_key=(3, epoch, int(si))))
                scaled, idx_map, _ = preprocess(pts, pre_cfg, rng)
                _, raw9, cache = forward(net_cfg, params, scaled)
                breakdown, draw = loss_and_grad(raw9, lab[idx_map],
                                                msk[idx_map])
                if not np.isfinite(breakdown.total):
                    raise NonFiniteLoss(
                        f"non-finite loss at epoch {epoch}",
                        batch_id=(epoch, b0 // train_cfg.batch_size))
                bloss += breakdown.total
                g = backward(net_cfg, params, cache, draw)
                if gsum is None:
                    gsum = g
                else:
                    for k in gsum:
                        gsum[k] += g[k]
            scale = 1.0 / len(batch)
            for k in params:
                grad = gsum[k] * scale
                if k.endswith(".W"):
                    grad = grad + wd * params[k]
                velocity[k] = mom * velocity[k] - lr * grad
                params[k] = params[k] + velocity[k]
            epoch_losses.append(bloss * scale)
        mean_loss = float(np.mean(epoch_losses)) if epoch_losses else 0.0
        history.append(mean_loss)
        if callback is not None:
            callback(epoch, mean_loss)

    meta = {"epochs": train_cfg.epochs, "seed": train_cfg.seed,
            "loss_history": history,
            "train_indices": [int(i) for i in train_idx],
            "test_indices": [int(i) for i in test_idx],
            "preprocess": asdict(pre_cfg)}
    return make_checkpoint(net_cfg, params, meta), train_idx, test_idx


# ---------------------------------------------------------------------------
# checkpoint binary format: magic "PGCK", little-endian

_MAGIC = b"PGCK"
_VERSION = 1


def _config_as_json(cfg: NetworkConfig):
    return json.dumps({
        "sa_levels": [[s.k, s.radius, list(s.widths)] for s in cfg.sa_levels],
        "fp_widths": [list(w) for w in cfg.fp_widths],
        "neighbor_cap": cfg.neighbor_cap,
        "head_hidden": cfg.head_hidden,
        "n_points": cfg.n_points,
    })


def _config_from_json(text):
    d = json.loads(text)
    return NetworkConfig(
        sa_levels=tuple(SALevel(k, r, tuple(w)) for k, r, w in d["sa_levels"]),
        fp_widths=tuple(tuple(w) for w in d["fp_widths"]),
        neighbor_cap=int(d["neighbor_cap"]),
        head_hidden=int(d["head_hidden"]),
        n_points=int(d["n_points"]))


def save_checkpoint(ckpt: Checkpoint, path):
    cfg_blob = _config_as_json(ckpt.config).encode("utf-8")
    meta_blob = json.dumps(ckpt.meta).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(cfg_blob)))
        fh.write(cfg_blob)
        fh.write(struct.pack("<I", len(ckpt.params)))
        for name in sorted(ckpt.params):
            nb = name.encode("utf-8")
            arr = ckpt.params[name]
            fh.write(struct.pack("<I", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.astype("<f4").tobytes())
        fh.write(struct.pack("<I", len(meta_blob)))
        fh.write(meta_blob)


def load_checkpoint(path):
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path} is not a checkpoint file")
        version, cfg_len = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        cfg = _config_from_json(fh.read(cfg_len).decode("utf-8"))
        (n_params,) = struct.unpack("<I", fh.read(4))
        params = {}
        for _ in range(n_params):
            (name_len,) = struct.unpack("<I", fh.read(4))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<I", fh.read(4))
            shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
            size = int(np.prod(shape))
            arr = np.frombuffer(fh.read(4 * size),
                                dtype="<f4").reshape(shape)
            params[name] = arr.copy()
        (meta_len,) = struct.unpack("<I", fh.read(4))
        meta = json.loads(fh.read(meta_len).decode("utf-8"))
    return Checkpoint(cfg, params, meta)
