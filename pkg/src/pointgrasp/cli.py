"""Command-line interface.

Subcommands:
    plan      plan grasps for every mesh in a directory
    gen       generate a labeled multi-object dataset
    train     train the per-point predictor on a dataset
    predict   predict ranked grasps for a point cloud file
    eval      threshold sweep (precision / recall) on a dataset split
    inspect   dump a sample's points, labels and masks as text

All subcommands accept --seed, --config and --jobs.  Runtime errors exit
with status 1 and a single machine-parseable "error: ..." line.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import load_config
from .errors import PointGraspError
from .evaluation import MatchCriterion, rahp, rescore
from .geometry.camera import CameraIntrinsics
from .geometry.gripper import GripperModel
from .geometry.mesh import MeshSet, load_mesh
from .geometry.transforms import RigidTransform
from .learner.network import desk_config
from .learner.predict import CATEGORY_THRESHOLD, predict
from .learner.preprocess import PreprocessConfig
from .learner.train import TrainConfig, load_checkpoint, save_checkpoint, train
from .planner import (ObjectSpec, PlannerConfig, load_grasp_set, plan_object,
                      save_grasp_set)
from .quality import QualityConfig
from .scenegen.capture import CameraBands
from .scenegen.dataset import DatasetConfig, generate_dataset
from .scenegen.labels import read_sample
from .scenegen.scene import PlacedObject, SceneSpec, ground_mesh

MESH_EXTENSIONS = (".stl", ".obj", ".json")


def _load_model_dir(path, density=0.5, mu=0.2):
    files = sorted(f for f in os.listdir(path)
                   if f.lower().endswith(MESH_EXTENSIONS))
    if not files:
        raise PointGraspError(f"no mesh files in {path}")
    specs = []
    for f in files:
        mesh = load_mesh(os.path.join(path, f))
        name = os.path.splitext(f)[0]
        specs.append((ObjectSpec.from_mesh(name, mesh, density, mu), f))
    return specs


def _cfg(args, key, default):
    return args.loaded_config.get(key, default)


_PLAN_STATE = {}


def _plan_one(task):
    spec, seed, out_dir = task
    gs = plan_object(spec, _PLAN_STATE["gripper"], _PLAN_STATE["planner"],
                     _PLAN_STATE["quality"], seed=seed)
    path = os.path.join(out_dir, f"{spec.name}.graspset")
    save_grasp_set(gs, path)
    return (spec.name, len(gs.majors), gs.negative_points.shape[0])


def _init_plan(state):
    _PLAN_STATE.update(state)


def cmd_plan(args):
    planner_cfg = _cfg(args, "planner", PlannerConfig())
    gripper = _cfg(args, "gripper", GripperModel())
    qcfg = _cfg(args, "quality", QualityConfig())
    specs = _load_model_dir(args.meshes, args.density, args.mu)
    os.makedirs(args.out, exist_ok=True)
    tasks = [(spec, args.seed, args.out) for spec, _ in specs]
    state = {"gripper": gripper, "planner": planner_cfg, "quality": qcfg}
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs,
                                 initializer=_init_plan,
                                 initargs=(state,)) as pool:
            results = list(pool.map(_plan_one, tasks))
    else:
        _init_plan(state)
        results = [_plan_one(t) for t in tasks]
    index = [{"name": spec.name, "file": fname, "mass": spec.mass,
              "centroid": spec.centroid.tolist(), "mu": spec.mu}
             for spec, fname in specs]
    with open(os.path.join(args.out, "models.json"), "w") as fh:
        json.dump({"density": args.density, "mu": args.mu,
                   "models": index}, fh, indent=1)
    for name, n_maj, n_neg in results:
        print(f"{name}: {n_maj} majors, {n_neg} negative points")
    return 0


def cmd_gen(args):
    gripper = _cfg(args, "gripper", GripperModel())
    base = _cfg(args, "dataset", DatasetConfig())
    cfg = DatasetConfig(
        n_sim=args.sims or base.n_sim,
        n_cam=args.cams or base.n_cam,
        query_radius=base.query_radius,
        m_min=base.m_min, m_max=base.m_max,
        seed=args.seed,
        totebox_half=base.totebox_half, crop_half=base.crop_half)
    intrinsics = _cfg(args, "camera", CameraIntrinsics.default())
    bands = _cfg(args, "camera_bands", CameraBands())
    specs = _load_model_dir(args.meshes, args.density, args.mu)
    models = [s for s, _ in specs]
    grasp_sets = {}
    for spec, _ in specs:
        path = os.path.join(args.graspsets, f"{spec.name}.graspset")
        if not os.path.exists(path):
            raise PointGraspError(f"missing grasp set {path}")
        grasp_sets[spec.name] = load_grasp_set(path)
    manifest = generate_dataset(
        models, grasp_sets, gripper, cfg, args.out,
        intrinsics=intrinsics, bands=bands, jobs=args.jobs,
        model_files=[{"name": s.name, "file": f} for s, f in specs])
    with open(manifest) as fh:
        n = len(json.load(fh)["samples"])
    print(f"wrote {n} samples under {args.out}")
    return 0


def _load_dataset(data_dir):
    manifest_path = os.path.join(data_dir, "manifest.json")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    samples = [read_sample(os.path.join(data_dir, row["path"]))
               for row in manifest["samples"]]
    return manifest, samples


def cmd_train(args):
    manifest, samples = _load_dataset(args.data)
    net_cfg = _cfg(args, "network", desk_config())
    train_cfg = _cfg(args, "train", None)
    if train_cfg is None:
        train_cfg = TrainConfig(epochs=args.epochs, seed=args.seed)
    pre_cfg = _cfg(args, "preprocess",
                   PreprocessConfig(target_count=net_cfg.n_points))
    every = max(1, train_cfg.epochs // 10)

    def progress(epoch, loss):
        if epoch % every == 0 or epoch == train_cfg.epochs - 1:
            print(f"epoch {epoch}: loss {loss:.6f}")

    ckpt, train_idx, test_idx = train(samples, net_cfg, train_cfg, pre_cfg,
                                      callback=progress)
    ckpt.meta["data_dir"] = os.path.abspath(args.data)
    save_checkpoint(ckpt, args.out)
    print(f"checkpoint written to {args.out} "
          f"({len(train_idx)} train / {len(test_idx)} test samples)")
    return 0


def _load_cloud_file(path):
    if path.endswith(".pngd"):
        return read_sample(path).points
    pts = np.loadtxt(path, dtype=np.float64)
    return pts.reshape(-1, 3)


def cmd_predict(args):
    ckpt = load_checkpoint(args.checkpoint)
    gripper = _cfg(args, "gripper", GripperModel())
    cloud = _load_cloud_file(args.cloud)
    preds = predict(cloud, ckpt, threshold=args.threshold,
                    crop_half_extent=args.window, gripper=gripper,
                    resample_seed=args.seed)
    rows = []
    for pg in preds:
        g = pg.grasp
        rows.append(" ".join(f"{v:.6f}" for v in (
            *g.p, *g.n, *g.r, g.d, pg.score, pg.category_prob)))
    text = "\n".join(rows) + ("\n" if rows else "")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"{len(preds)} grasps above threshold {args.threshold}",
          file=sys.stderr)
    return 0


def _scene_from_sidecar(sidecar, models_by_name):
    placed = []
    meshes = [ground_mesh()]
    for row in sidecar["objects"]:
        tf = RigidTransform(np.asarray(row["rotation"]),
                            np.asarray(row["translation"]))
        placed.append(PlacedObject(row["name"], row["model_index"], tf))
        meshes.append(models_by_name[row["name"]].mesh.transformed(tf))
    return SceneSpec(placed, 100.0, MeshSet(meshes))


def cmd_eval(args):
    ckpt = load_checkpoint(args.checkpoint)
    gripper = _cfg(args, "gripper", GripperModel())
    qcfg = _cfg(args, "quality", QualityConfig())
    criterion = _cfg(args, "match", MatchCriterion())
    manifest, _ = _load_dataset(args.data)
    specs = _load_model_dir(args.meshes)
    models_by_name = {s.name: s for s, _ in specs}

    rows = manifest["samples"]
    if args.split == "test" and "test_indices" in ckpt.meta:
        wanted = set(ckpt.meta["test_indices"])
        rows = [r for i, r in enumerate(rows) if i in wanted]
    scenes = {s["sim"]: s for s in manifest["scenes"]}

    probs = []
    pts = []
    nrms = []
    qs = []
    label_pts = []
    label_nrms = []
    for row in rows:
        sample = read_sample(os.path.join(args.data, row["path"]))
        with open(os.path.join(args.data, scenes[row["sim"]]["path"])) as fh:
            sidecar = json.load(fh)
        scene = _scene_from_sidecar(sidecar, models_by_name)
        preds = predict(sample.points, ckpt, threshold=0.0,
                        gripper=gripper, resample_seed=args.seed)
        grasps = [pg.grasp for pg in preds]
        q = rescore(grasps, scene, models_by_name, gripper, qcfg)
        probs.extend(pg.category_prob for pg in preds)
        pts.extend(pg.grasp.p for pg in preds)
        nrms.extend(pg.grasp.n for pg in preds)
        qs.extend(q)
        is_pos = np.all(sample.masks == (1, 1, 1, 1), axis=1)
        label_pts.extend(sample.points[is_pos])
        label_nrms.extend(sample.labels[is_pos, 0:3])

    thresholds = [float(t) for t in args.thresholds.split(",")] \
        if args.thresholds else [i / 20.0 for i in range(20)]
    report = rahp(probs, pts, nrms, qs, label_pts, label_nrms, criterion,
                  thresholds, target_precision=args.target_precision)
    out = report.as_dict()
    out["n_samples"] = len(rows)
    out["n_predictions"] = len(probs)
    out["n_label_grasps"] = len(label_pts)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(out, fh, indent=1)
    print(json.dumps(out, indent=1))
    return 0


def cmd_inspect(args):
    sample = read_sample(args.sample)
    n = sample.points.shape[0]
    print(f"# points={n}")
    for i in range(n):
        x = " ".join(f"{v:.6f}" for v in sample.points[i])
        l = " ".join(f"{v:.6f}" for v in sample.labels[i])
        m = " ".join(str(int(v)) for v in sample.masks[i])
        print(f"{x} {l} {m}")
    return 0


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--config", default=None,
                    help="JSON config file with typed sections")
    sp.add_argument("--jobs", type=int, default=1)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pointgrasp",
        description="Grasp dataset synthesis and per-point grasp prediction")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan grasps for a mesh directory")
    p.add_argument("--meshes", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=0.2)
    _add_common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("gen", help="generate a labeled dataset")
    p.add_argument("--meshes", required=True)
    p.add_argument("--graspsets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sims", type=int, default=None)
    p.add_argument("--cams", type=int, default=None)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=0.2)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train the predictor")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=200)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict grasps for a cloud file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--cloud", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--threshold", type=float, default=CATEGORY_THRESHOLD)
    p.add_argument("--window", type=float, default=200.0,
                   help="prediction crop half-extent, mm")
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="precision/recall threshold sweep")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--meshes", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--thresholds", default=None,
                   help="comma-separated threshold list")
    p.add_argument("--target-precision", type=float, default=0.99)
    p.add_argument("--split", choices=("test", "all"), default="test")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", help="dump a sample as text")
    p.add_argument("sample")
    _add_common(p)
    p.set_defaults(func=cmd_inspect)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.loaded_config = load_config(args.config) if args.config else {}
        return args.func(args)
    except PointGraspError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
