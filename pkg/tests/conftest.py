import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pointgrasp.geometry import (GripperModel, make_box, make_cylinder,
                                 make_sphere)
from pointgrasp.planner import ObjectSpec


@pytest.fixture(scope="session")
def gripper():
    return GripperModel()


@pytest.fixture(scope="session")
def cube40():
    return make_box([40.0, 40.0, 40.0])


@pytest.fixture(scope="session")
def cube80():
    return make_box([80.0, 80.0, 80.0])


@pytest.fixture(scope="session")
def sphere25():
    return make_sphere(25.0, 3)


@pytest.fixture(scope="session")
def cube40_spec(cube40):
    return ObjectSpec.from_mesh("cube40", cube40)


@pytest.fixture(scope="session")
def toy_models():
    return [
        ObjectSpec.from_mesh("cube32", make_box([32.0, 32.0, 32.0])),
        ObjectSpec.from_mesh("slab", make_box([50.0, 24.0, 18.0])),
        ObjectSpec.from_mesh("cyl", make_cylinder(11.0, 44.0, 20)),
    ]


def toy_mesh_specs():
    """Primitive spec dicts matching toy_models, for CLI-level tests."""
    return {
        "cube32": {"primitive": "box", "extents": [32, 32, 32]},
        "slab": {"primitive": "box", "extents": [50, 24, 18]},
        "cyl": {"primitive": "cylinder", "radius": 11, "height": 44,
                "segments": 20},
    }


def write_toy_meshes(path):
    os.makedirs(path, exist_ok=True)
    for name, spec in toy_mesh_specs().items():
        with open(os.path.join(path, f"{name}.json"), "w") as fh:
            json.dump(spec, fh)


@pytest.fixture(scope="session")
def toy_grasp_sets(toy_models, gripper):
    """Reduced-size planned grasp sets shared by scene/dataset tests."""
    from pointgrasp.planner import PlannerConfig, plan_object
    cfg = PlannerConfig(n_samples=48, n_rotations=8)
    return {m.name: plan_object(m, gripper, cfg, seed=5) for m in toy_models}


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory, toy_models, toy_grasp_sets, gripper):
    """The 50-sample toy dataset (N_sim=10, N_cam=5) used by acceptance."""
    from pointgrasp.scenegen import DatasetConfig, generate_dataset
    out = tmp_path_factory.mktemp("toy_dataset")
    cfg = DatasetConfig(n_sim=10, n_cam=5, m_min=2, m_max=4, seed=123)
    manifest = generate_dataset(toy_models, toy_grasp_sets, gripper, cfg,
                                str(out), jobs=1)
    return {"dir": str(out), "manifest": manifest, "config": cfg,
            "models": toy_models, "grasp_sets": toy_grasp_sets}


def load_manifest(dataset):
    with open(dataset["manifest"]) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
