import json
import math

import pytest

from app.models import ParallelogramParams, TrapezoidParams
from app.services import polygon as geometry


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: FEM acceptance runs on fine meshes (run by default)")


@pytest.fixture
def unit_square():
    return geometry.make_rectangle(1.0, 1.0)


@pytest.fixture
def gww():
    return geometry.gww_pair()


@pytest.fixture
def worked_parallelogram():
    """L = 2, W = 1, alpha = pi/3: area sqrt(3), perimeter 6, a0 = 7/24."""
    return ParallelogramParams(L=2.0, W=1.0, alpha=math.pi / 3)


@pytest.fixture
def worked_trapezoid():
    return TrapezoidParams.from_base_angles(B=6.0, h=1.0, alpha=math.pi / 5, beta=math.pi / 10)


@pytest.fixture
def write_json(tmp_path):
    """Write a payload to tmp_path/name and return the path as a string."""

    def _write(name: str, payload) -> str:
        path = tmp_path / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        return str(path)

    return _write
