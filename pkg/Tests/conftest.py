import os

import numpy as np
import pytest

from hypothesis import strategies as st

from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.VerificationScripts import MeshFixtures as Fx
from PythonScripts.VerificationScripts.TheoremSuites import random_simplex


SAMPLE_MESHES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "1. Sample Meshes")
GOLDEN = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def random_simplex_points(seed: int, n: int) -> np.ndarray:
    """Random simplex with normalized volume at least 1e-3, drawn from a seeded generator."""
    return random_simplex(np.random.default_rng(seed), n, 1e-3)


@pytest.fixture
def equilateral():
    return Fx.equilateral_triangle()


@pytest.fixture
def right():
    return Fx.right_triangle()


@pytest.fixture
def tetrahedron():
    return Fx.regular_tetrahedron()


@pytest.fixture
def hexagon_fan():
    return Fx.hexagon_fan()


@pytest.fixture
def off_center_fan():
    return Fx.hexagon_fan(center=(0.5, 0.3))


@pytest.fixture
def two_triangles():
    """Acute triangle above the x axis and an obtuse one below, sharing the edge (0,0)-(2,0)."""
    return SimplicialMesh.from_arrays([[0.0, 0.0], [2.0, 0.0], [1.0, 2.0], [1.0, -0.5]], [[0, 1, 2], [0, 3, 1]])


@pytest.fixture
def sample_path():
    return lambda name: os.path.join(SAMPLE_MESHES, name)


@pytest.fixture
def golden_path():
    return lambda name: os.path.join(GOLDEN, name)
