import itertools

import numpy as np
import pytest

from vsem.complexcore.generate import gen_ball_mesh
from vsem.complexcore.simplicial import SimplicialComplex
from vsem.config import get_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    """Settings are cached per process; tests that patch VSEM_* need a clean read."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def right_triangle():
    return SimplicialComplex(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]))


@pytest.fixture
def regular_tetrahedron():
    vertices = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
    return SimplicialComplex(vertices, np.array([[0, 1, 2, 3]]))


@pytest.fixture
def octahedron():
    """Outward-oriented boundary of the cross-polytope in R^3."""
    vertices = np.array(
        [[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0], [0, -1.0, 0], [0, 0, 1.0], [0, 0, -1.0]]
    )
    faces = []
    for sx, sy, sz in itertools.product((1, -1), repeat=3):
        face = [0 if sx > 0 else 1, 2 if sy > 0 else 3, 4 if sz > 0 else 5]
        if sx * sy * sz < 0:
            face[0], face[1] = face[1], face[0]
        faces.append(face)
    return SimplicialComplex(vertices, np.array(faces))


@pytest.fixture
def disk():
    return gen_ball_mesh(2, 4)


@pytest.fixture
def ball3():
    return gen_ball_mesh(3, 3)
