"""Multi-object dataset generation: compose, filter, capture, label.

Each simulation composes one scene and filters every placed object's
planned grasps against it; n_cam independent camera captures then yield
one training sample each.  Simulations are keyed by (master seed, sim
index) through numpy SeedSequence spawn keys, so outputs are bit-identical
for any worker count.
"""

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import EmptyCapture, PlacementFailure
from ..geometry.camera import CameraIntrinsics
from ..geometry.gripper import GripperModel, collide
from .capture import CameraBands, capture, randomize_camera
from .labels import assign_labels, write_sample
from .scene import SceneSpec, compose_scene


@dataclass(frozen=True)
class DatasetConfig:
    n_sim: int = 4000
    n_cam: int = 5
    query_radius: float = 1.0
    m_min: int = 1
    m_max: int = 8
    seed: int = 0
    totebox_half: float = 100.0
    crop_half: float = 100.0

    def __post_init__(self):
        if min(self.n_sim, self.n_cam, self.m_min, self.m_max) < 1:
            raise ValueError("counts must be at least 1")
        if self.query_radius <= 0:
            raise ValueError("query radius must be positive")


@dataclass
class FilterResult:
    """Scene-frame grasp labels after collision filtering."""

    pos_points: np.ndarray       # (P,3)
    pos_grasps: list             # [Grasp], scene frame
    pos_scores: np.ndarray       # (P,)
    pos_instance: np.ndarray     # (P,) placed-object index
    neg_points: np.ndarray       # (Q,3)
    neg_normals: np.ndarray      # (Q,3)


def scene_grasp_filter(scene: SceneSpec, grasp_sets, gripper: GripperModel):
    """Keep each major grasp if collision-free, else its best collision-free
    supplementary, else record the point as negative.  Planner negatives of
    every placed object are carried over in scene frame."""
    pos_p = []
    pos_g = []
    pos_q = []
    pos_k = []
    neg_p = []
    neg_n = []
    for k, placed in enumerate(scene.placed):
        gs = grasp_sets[placed.name]
        tf = placed.pose
        for (major, q), supp in zip(gs.majors, gs.supplementary):
            gw = major.transformed(tf)
            if not collide(gripper, gw, scene.meshset):
                pos_p.append(gw.p)
                pos_g.append(gw)
                pos_q.append(q)
                pos_k.append(k)
                continue
            star = None
            for sg, sq in supp:        # sorted by quality descending
                sw = sg.transformed(tf)
                if not collide(gripper, sw, scene.meshset):
                    star = (sw, sq)
                    break
            if star is not None:
                pos_p.append(gw.p)
                pos_g.append(star[0])
                pos_q.append(star[1])
                pos_k.append(k)
            else:
                neg_p.append(gw.p)
                neg_n.append(gw.n)
        if gs.negative_points.shape[0]:
            neg_p.extend(tf.apply(gs.negative_points))
            neg_n.extend(tf.apply_vector(gs.negative_normals))
    return FilterResult(
        np.asarray(pos_p, dtype=np.float64).reshape(-1, 3), pos_g,
        np.asarray(pos_q, dtype=np.float64),
        np.asarray(pos_k, dtype=np.int64),
        np.asarray(neg_p, dtype=np.float64).reshape(-1, 3),
        np.asarray(neg_n, dtype=np.float64).reshape(-1, 3))


def _rigid_as_json(tf):
    return {"rotation": tf.rotation.tolist(),
            "translation": tf.translation.tolist()}


def simulate_one(models, grasp_sets, gripper, cfg: DatasetConfig,
                 intrinsics, bands, sim_index, out_dir):
    """Run one simulation: compose once, filter once, capture n_cam times.

    Returns (sample_rows, scene_row, failure_rows); files are written under
    out_dir/samples and out_dir/scenes.
    """
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(sim_index, 0)))
    m = int(rng.integers(cfg.m_min, cfg.m_max + 1))
    failures = []
    try:
        scene = compose_scene(models, m, rng, cfg.totebox_half)
    except PlacementFailure as exc:
        return [], None, [{"sim": sim_index, "cam": None,
                           "error": f"PlacementFailure: {exc}"}]
    filt = scene_grasp_filter(scene, grasp_sets, gripper)

    samples = []
    cameras = []
    for c in range(cfg.n_cam):
        cam_rng = np.random.default_rng(np.random.SeedSequence(
            entropy=cfg.seed, spawn_key=(sim_index, 1, c)))
        cam = randomize_camera(scene.center, cam_rng, bands, intrinsics)
        cameras.append(cam)
        name = f"sim{sim_index:05d}_cam{c:02d}.pngd"
        try:
            cap = capture(scene, cam, cfg.crop_half)
        except EmptyCapture as exc:
            failures.append({"sim": sim_index, "cam": c,
                             "error": f"EmptyCapture: {exc}"})
            continue
        sample = assign_labels(
            cap, filt.pos_points, filt.pos_grasps, filt.pos_scores,
            filt.neg_points, filt.neg_normals, cfg.query_radius,
            meta={"sim": sim_index, "cam": c})
        write_sample(sample, os.path.join(out_dir, "samples", name))
        samples.append({
            "path": f"samples/{name}", "sim": sim_index, "cam": c,
            "n_points": int(sample.points.shape[0]),
            "n_base": int(sample.meta["n_base"]),
        })

    scene_name = f"sim{sim_index:05d}.json"
    scene_row = {
        "sim": sim_index, "path": f"scenes/{scene_name}",
        "m_requested": m, "m_placed": len(scene.placed),
        "placement_failures": scene.failures,
        "n_positive": int(filt.pos_points.shape[0]),
        "n_negative": int(filt.neg_points.shape[0]),
    }
    sidecar = {
        "sim": sim_index,
        "objects": [{"name": p.name, "model_index": p.model_index,
                     **_rigid_as_json(p.pose)} for p in scene.placed],
        "positives": [{
            "p": g.p.tolist(), "n": g.n.tolist(), "r": g.r.tolist(),
            "d": g.d, "q_c": float(q), "instance": int(k),
            "point": pt.tolist(),
        } for pt, g, q, k in zip(filt.pos_points, filt.pos_grasps,
                                 filt.pos_scores, filt.pos_instance)],
        "negative_points": filt.neg_points.tolist(),
        "negative_normals": filt.neg_normals.tolist(),
        "cameras": [_rigid_as_json(cam.pose) for cam in cameras],
    }
    with open(os.path.join(out_dir, "scenes", scene_name), "w") as fh:
        json.dump(sidecar, fh)
    return samples, scene_row, failures


_WORKER_PAYLOAD = None


def _init_worker(payload):
    global _WORKER_PAYLOAD
    _WORKER_PAYLOAD = payload


def _run_sim(sim_index):
    models, grasp_sets, gripper, cfg, intr, bands, out_dir = _WORKER_PAYLOAD
    return simulate_one(models, grasp_sets, gripper, cfg, intr, bands,
                        sim_index, out_dir)


def generate_dataset(models, grasp_sets, gripper, cfg: DatasetConfig,
                     out_dir, intrinsics=None, bands=None, jobs=1,
                     model_files=None):
    """Generate cfg.n_sim x cfg.n_cam samples plus scene sidecars.

    Returns the manifest path.  Bit-identical output for any jobs count.
    """
    intrinsics = intrinsics or CameraIntrinsics.default()
    bands = bands or CameraBands()
    os.makedirs(os.path.join(out_dir, "samples"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "scenes"), exist_ok=True)
    payload = (models, grasp_sets, gripper, cfg, intrinsics, bands, out_dir)
    results = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(payload,)) as pool:
            results = list(pool.map(_run_sim, range(cfg.n_sim)))
    else:
        _init_worker(payload)
        results = [_run_sim(i) for i in range(cfg.n_sim)]

    samples = []
    scenes = []
    failures = []
    for rows, scene_row, fails in results:
        samples.extend(rows)
        if scene_row is not None:
            scenes.append(scene_row)
        failures.extend(fails)
    manifest = {
        "version": 1,
        "config": asdict(cfg),
        "gripper": asdict(gripper),
        "intrinsics": asdict(intrinsics),
        "models": model_files or [{"name": m.name} for m in models],
        "samples": samples,
        "scenes": scenes,
        "failures": failures,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1)
    return path
