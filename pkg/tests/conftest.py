import json

import numpy as np
import pytest

from planar_rpr import RobotGeometry

# Desk-scale reference design used throughout the suite.
REF_BASE = [(0.0, 0.0), (10.0, 0.0), (4.0, 8.0)]
REF_PLATFORM = [(-2.0, -1.0), (2.0, -1.0), (0.0, 2.0)]
REF_SCALE = 10.0


@pytest.fixture(scope="session")
def ref():
    return RobotGeometry(base=REF_BASE, platform=REF_PLATFORM, name="ref")


@pytest.fixture(scope="session")
def similar_design():
    """Platform = half-scale copy of the base about its centroid."""
    base = np.asarray(REF_BASE)
    return RobotGeometry(base=base, platform=0.5 * (base - base.mean(axis=0)))


@pytest.fixture
def ref_file(tmp_path):
    path = tmp_path / "ref.json"
    path.write_text(json.dumps({"base": REF_BASE, "platform": REF_PLATFORM, "name": "ref"}))
    return path


def random_pose_tuple(rng, scale=REF_SCALE):
    return (
        rng.uniform(-scale, 2.0 * scale),
        rng.uniform(-scale, 2.0 * scale),
        rng.uniform(0.0, 2.0 * np.pi),
    )
