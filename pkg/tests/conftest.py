import json
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

sys.path.insert(0, str(Path(__file__).resolve().parent))

from posefocal import ParamState, Pose, UpdateVector  # noqa: E402

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def random_rotation(rng):
    # scipy is the reference sampler so package code is not checked against itself
    return Rotation.random(random_state=rng).as_matrix()


def random_state(rng, f_range=(200.0, 1000.0), z_range=(0.8, 3.0), xy=0.1):
    t = (rng.uniform(-xy, xy), rng.uniform(-xy, xy), rng.uniform(*z_range))
    return ParamState(Pose(random_rotation(rng), t), rng.uniform(*f_range))


def random_delta(rng):
    dR = random_rotation(rng)
    return UpdateVector(
        v_x=rng.normal(0, 50),
        v_y=rng.normal(0, 50),
        v_z=rng.uniform(0.6, 1.6),
        v_r1=dR[:, 0] + rng.normal(0, 0.1, 3),
        v_r2=dR[:, 1] + rng.normal(0, 0.1, 3),
        v_f=rng.normal(0, 0.4),
    )


def as_oracle_state(s):
    return (s.R.tolist(), s.t.tolist(), s.f)


def as_oracle_delta(d):
    return {"vx": d.v_x, "vy": d.v_y, "vz": d.v_z, "r1": d.v_r1.tolist(),
            "r2": d.v_r2.tolist(), "vf": d.v_f}


def state_from_dict(d):
    return ParamState(Pose(d["R"], d["t"]), d["f"])


def delta_from_dict(d):
    return UpdateVector(d["vx"], d["vy"], d["vz"], d["r1"], d["r2"], d["vf"])


@pytest.fixture(scope="session")
def oracle_cases():
    return json.loads((FIXTURES / "oracle_cases.json").read_text())["cases"]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cube_points():
    return np.random.default_rng(3).uniform(-0.1, 0.1, size=(100, 3))


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
