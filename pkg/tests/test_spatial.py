import numpy as np
import pytest

from pointgrasp.geometry import PointCloud, SpatialIndex, radius_nearest

from oracles import brute_nearest_within


def test_radius_nearest_basic():
    index = SpatialIndex(PointCloud([(0, 0, 0), (10, 0, 0)]))
    assert radius_nearest(index, (0.4, 0, 0), 1.0) == 0
    assert radius_nearest(index, (5.0, 0, 0), 1.0) is None


def test_radius_nearest_rejects_bad_radius():
    index = SpatialIndex(PointCloud([(0, 0, 0)]))
    with pytest.raises(ValueError):
        radius_nearest(index, (0, 0, 0), 0.0)


def test_empty_cloud_rejected():
    with pytest.raises(ValueError):
        SpatialIndex(PointCloud(np.zeros((0, 3))))


def test_matches_brute_force_scan():
    rng = np.random.default_rng(99)
    for trial in range(100):
        pts = rng.uniform(-50, 50, size=(rng.integers(5, 1000), 3))
        index = SpatialIndex(pts)
        queries = rng.uniform(-60, 60, size=(10, 3))
        radius = float(rng.uniform(0.5, 30.0))
        for q in queries:
            got = radius_nearest(index, q, radius)
            want = brute_nearest_within(pts, q, radius)
            assert (got if got is not None else -1) == want
