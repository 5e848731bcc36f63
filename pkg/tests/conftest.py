"""
MeanLab Test Configuration
Pytest fixtures and test utilities
"""
from pathlib import Path

import numpy as np
import pytest

from app.schemas import QuadratureSpec
from app.services.fields import make_cone, make_cosine, make_gaussian


@pytest.fixture
def spec() -> QuadratureSpec:
    """Default quadrature resolution"""
    return QuadratureSpec.default()


@pytest.fixture
def quick_spec() -> QuadratureSpec:
    """Reduced node counts for tests that only need a few digits"""
    return QuadratureSpec(jacobi_nodes=32, smooth_nodes=48, sphere_order=32)


@pytest.fixture
def gaussian_1d():
    return make_gaussian(np.zeros(1), 1.0)


@pytest.fixture
def gaussian_2d():
    return make_gaussian(np.zeros(2), 1.0)


@pytest.fixture
def cosine_1d():
    return make_cosine([1.0])


@pytest.fixture
def cone_2d():
    """A|x - pole|^{2s-1} with A = 1, B = 0, s = 0.75"""
    return make_cone(1.0, 0.0, np.zeros(2), 0.75)


@pytest.fixture
def regular_point_2d() -> np.ndarray:
    """A point of the 2-d gaussian with nonzero gradient"""
    return np.array([0.5, 0.3])


@pytest.fixture
def output_dir(tmp_path) -> Path:
    path = tmp_path / "results"
    path.mkdir()
    return path
