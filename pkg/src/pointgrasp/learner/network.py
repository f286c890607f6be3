"""Hierarchical per-point network on raw point coordinates.

Set-abstraction (SA) levels downsample by farthest point sampling, group
neighbors by ball query, run a shared per-neighbor MLP on centroid-relative
coordinates plus features, and max-pool per region.  Feature-propagation
(FP) levels interpolate back up with inverse-distance 3-NN weights, concat
the skip features, and run a shared MLP.  Two per-point dense layers emit
9 channels split into score / category / normal / rotation heads.

Everything is plain numpy with hand-written backward passes; geometry
selections (FPS, ball membership, 3-NN weights) depend only on the input
coordinates, never on parameters, so parameter gradients flow exclusively
through the dense layers, ReLUs and max-pools.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import ConfigMismatch

NORM_EPS = 1e-12
INTERP_EPS = 1e-10


@dataclass(frozen=True)
class SALevel:
    k: int
    radius: float
    widths: tuple

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if self.k < 1 or self.radius <= 0 or not self.widths:
            raise ValueError("bad SA level")


@dataclass(frozen=True)
class NetworkConfig:
    sa_levels: tuple
    fp_widths: tuple
    neighbor_cap: int = 32
    head_hidden: int = 32
    n_points: int = 8192
    head_split: tuple = (1, 2, 3, 3)

    def __post_init__(self):
        object.__setattr__(self, "sa_levels", tuple(self.sa_levels))
        object.__setattr__(self, "fp_widths",
                           tuple(tuple(int(w) for w in ws)
                                 for ws in self.fp_widths))
        object.__setattr__(self, "head_split",
                           tuple(int(h) for h in self.head_split))
        if len(self.fp_widths) != len(self.sa_levels):
            raise ValueError("need one FP level per SA level")
        ks = [s.k for s in self.sa_levels]
        if any(b >= a for a, b in zip(ks, ks[1:])):
            raise ValueError("SA point counts must strictly decrease")
        rs = [s.radius for s in self.sa_levels]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("SA radii must strictly increase")
        if sum(self.head_split) != 9 or self.head_split != (1, 2, 3, 3):
            raise ValueError("head split must be (1,2,3,3)")
        if self.sa_levels[0].k > self.n_points:
            raise ValueError("first SA level larger than the input cloud")


def desk_config(n_points=8192):
    """Small default stack for CPU-scale experiments."""
    return NetworkConfig(
        sa_levels=(SALevel(256, 0.1, (16, 16, 32)),
                   SALevel(64, 0.3, (32, 32, 64))),
        fp_widths=((64, 64), (64, 32)),
        neighbor_cap=32,
        head_hidden=32,
        n_points=n_points)


def paper_config(n_points=8192):
    """The full-scale stack expressed in the same grammar."""
    return NetworkConfig(
        sa_levels=(SALevel(1024, 0.1, (32, 32, 64)),
                   SALevel(256, 0.3, (64, 64, 128)),
                   SALevel(64, 0.5, (128, 128, 256)),
                   SALevel(16, 1.0, (256, 256, 512))),
        fp_widths=((256, 256), (256, 256), (256, 128), (128, 128, 128)),
        neighbor_cap=32,
        head_hidden=128,
        n_points=n_points)


@dataclass
class HeadOutputs:
    score: np.ndarray       # (N,)
    category: np.ndarray    # (N,) probability of graspable
    normal: np.ndarray      # (N,3) unit
    rotation: np.ndarray    # (N,3) unit


def _layer_dims(cfg: NetworkConfig):
    """(name, in, out) for every dense layer, in a fixed order."""
    dims = []
    feat = 0
    sa_out = []
    for i, sa in enumerate(cfg.sa_levels):
        cin = 3 + feat
        for j, w in enumerate(sa.widths):
            dims.append((f"sa{i}.m{j}", cin, w))
            cin = w
        feat = sa.widths[-1]
        sa_out.append(feat)
    coarse = sa_out[-1]
    for j, widths in enumerate(cfg.fp_widths):
        fine_level = len(cfg.sa_levels) - 2 - j
        skip = sa_out[fine_level] if fine_level >= 0 else 0
        cin = coarse + skip
        for l, w in enumerate(widths):
            dims.append((f"fp{j}.m{l}", cin, w))
            cin = w
        coarse = widths[-1]
    dims.append(("head.0", coarse, cfg.head_hidden))
    dims.append(("head.1", cfg.head_hidden, 9))
    return dims


def init_params(cfg: NetworkConfig, seed=0):
    """Fan-in scaled uniform weights, zero biases.

    Values are generated in float32 and held as float64, so a zero-epoch
    checkpoint (float32 storage) reproduces the fresh network exactly.
    """
    rng = np.random.default_rng(seed)
    params = {}
    for name, cin, cout in _layer_dims(cfg):
        bound = 1.0 / np.sqrt(cin)
        w = rng.uniform(-bound, bound, size=(cin, cout)).astype(np.float32)
        params[f"{name}.W"] = w.astype(np.float64)
        params[f"{name}.b"] = np.zeros(cout, dtype=np.float64)
    return params


def _dense_forward(h, w, b):
    return h @ w + b


def forward(cfg: NetworkConfig, params, xyz):
    """Run the network; returns (HeadOutputs, raw9, cache)."""
    xyz = np.asarray(xyz, dtype=np.float64)
    if xyz.shape != (cfg.n_points, 3):
        raise ConfigMismatch(
            f"expected ({cfg.n_points},3) input, got {xyz.shape}")
    for name, cin, cout in _layer_dims(cfg):
        if f"{name}.W" not in params \
                or params[f"{name}.W"].shape != (cin, cout):
            raise ConfigMismatch(f"missing or misshaped weights for {name}")

    cache = {"levels": []}
    pts = np.ascontiguousarray(xyz)
    feats = None
    level_pts = [pts]
    level_feats = [None]
    for i, sa in enumerate(cfg.sa_levels):
        start = int(np.argmax(pts.sum(axis=1)))
        sel = kernels.fps(pts, sa.k, start)
        cent = np.ascontiguousarray(pts[sel])
        nb, counts = kernels.ball_query(pts, cent, sa.radius,
                                        cfg.neighbor_cap)
        grouped = pts[nb] - cent[:, None, :]
        if feats is not None:
            grouped = np.concatenate([grouped, feats[nb]], axis=2)
        acts = []
        h = grouped
        for j in range(len(sa.widths)):
            pre = _dense_forward(h, params[f"sa{i}.m{j}.W"],
                                 params[f"sa{i}.m{j}.b"])
            mask = pre > 0
            acts.append((h, mask))
            h = np.where(mask, pre, 0.0)
        arg = np.argmax(h, axis=1)                       # (K, C)
        pooled = np.take_along_axis(h, arg[:, None, :], axis=1)[:, 0, :]
        cache["levels"].append({"sel": sel, "nb": nb, "acts": acts,
                                "arg": arg, "cap": cfg.neighbor_cap,
                                "had_feats": feats is not None})
        pts = cent
        feats = pooled
        level_pts.append(pts)
        level_feats.append(feats)

    cache["fp"] = []
    current = feats
    n_levels = len(cfg.sa_levels)
    for j, widths in enumerate(cfg.fp_widths):
        fine = n_levels - 1 - j                # index into level_* arrays
        idx3, d2 = kernels.three_nn(level_pts[fine], level_pts[fine + 1])
        dist = np.sqrt(d2) + INTERP_EPS
        w = 1.0 / dist
        w = w / w.sum(axis=1, keepdims=True)
        interp = np.einsum("nk,nkc->nc", w, current[idx3])
        skip = level_feats[fine]
        x = interp if skip is None else np.concatenate([interp, skip],
                                                       axis=1)
        acts = []
        h = x
        for l in range(len(widths)):
            pre = _dense_forward(h, params[f"fp{j}.m{l}.W"],
                                 params[f"fp{j}.m{l}.b"])
            mask = pre > 0
            acts.append((h, mask))
            h = np.where(mask, pre, 0.0)
        cache["fp"].append({"idx3": idx3, "w": w, "acts": acts,
                            "interp_c": interp.shape[1],
                            "skip": skip is not None})
        current = h

    h0_in = current
    pre0 = _dense_forward(h0_in, params["head.0.W"], params["head.0.b"])
    mask0 = pre0 > 0
    h0 = np.where(mask0, pre0, 0.0)
    raw9 = _dense_forward(h0, params["head.1.W"], params["head.1.b"])
    cache["head"] = (h0_in, mask0, h0)
    cache["n"] = cfg.n_points
    return heads_from_raw(raw9), raw9, cache


def heads_from_raw(raw9):
    """Split and normalize the 9-channel output into head values."""
    score = raw9[:, 0]
    cat = 1.0 / (1.0 + np.exp(-(raw9[:, 2] - raw9[:, 1])))
    normal = _unit_rows(raw9[:, 3:6])
    rotation = _unit_rows(raw9[:, 6:9])
    return HeadOutputs(score, cat, normal, rotation)


def _unit_rows(v):
    n = np.linalg.norm(v, axis=1, keepdims=True)
    return v / np.maximum(n, NORM_EPS)


def backward(cfg: NetworkConfig, params, cache, d_raw9):
    """Parameter gradients for a loss expressed on the raw 9 channels."""
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    h0_in, mask0, h0 = cache["head"]
    grads["head.1.W"] += h0.T @ d_raw9
    grads["head.1.b"] += d_raw9.sum(axis=0)
    dh0 = (d_raw9 @ params["head.1.W"].T) * mask0
    grads["head.0.W"] += h0_in.T @ dh0
    grads["head.0.b"] += dh0.sum(axis=0)
    dcur = dh0 @ params["head.0.W"].T

    n_levels = len(cfg.sa_levels)
    # gradient accumulators for level_feats[idx] (SA outputs by level)
    d_level_feats = [None] * (n_levels + 1)

    def acc(idx, val):
        if d_level_feats[idx] is None:
            d_level_feats[idx] = val
        else:
            d_level_feats[idx] += val

    # dcur enters as the gradient of the last FP level's output
    for j in range(len(cfg.fp_widths) - 1, -1, -1):
        fp = cache["fp"][j]
        widths = cfg.fp_widths[j]
        for l in range(len(widths) - 1, -1, -1):
            h_in, mask = fp["acts"][l]
            dpre = dcur * mask
            grads[f"fp{j}.m{l}.W"] += h_in.T @ dpre
            grads[f"fp{j}.m{l}.b"] += dpre.sum(axis=0)
            dcur = dpre @ params[f"fp{j}.m{l}.W"].T
        ci = fp["interp_c"]
        d_interp = dcur[:, :ci]
        fine = n_levels - 1 - j
        if fp["skip"]:
            acc(fine, dcur[:, ci:].copy())
        # inverse-distance scatter back to the coarse features
        k_coarse = cfg.sa_levels[n_levels - 1 - j].k
        dcoarse = np.zeros((k_coarse, ci))
        contrib = fp["w"][:, :, None] * d_interp[:, None, :]
        np.add.at(dcoarse, fp["idx3"].reshape(-1), contrib.reshape(-1, ci))
        if j == 0:
            acc(n_levels, dcoarse)      # top SA features
        else:
            dcur = dcoarse              # previous FP level's output

    for i in range(n_levels - 1, -1, -1):
        lv = cache["levels"][i]
        sa = cfg.sa_levels[i]
        dpool = d_level_feats[i + 1]
        k, cap = lv["nb"].shape
        dh = np.zeros((k, cap, dpool.shape[1]))
        np.put_along_axis(dh, lv["arg"][:, None, :], dpool[:, None, :],
                          axis=1)
        for j in range(len(sa.widths) - 1, -1, -1):
            h_in, mask = lv["acts"][j]
            dpre = dh * mask
            grads[f"sa{i}.m{j}.W"] += np.tensordot(h_in, dpre,
                                                   axes=([0, 1], [0, 1]))
            grads[f"sa{i}.m{j}.b"] += dpre.sum(axis=(0, 1))
            dh = np.tensordot(dpre, params[f"sa{i}.m{j}.W"].T,
                              axes=([2], [0]))
        if lv["had_feats"]:
            # feature part of the grouped input flows to the finer level;
            # the coordinate part is not a parameter path
            dfeats_nb = dh[:, :, 3:]
            prev_c = dfeats_nb.shape[2]
            dprev = np.zeros((cfg.sa_levels[i - 1].k, prev_c))
            np.add.at(dprev, lv["nb"].reshape(-1),
                      dfeats_nb.reshape(-1, prev_c))
            acc(i, dprev)
    return grads
