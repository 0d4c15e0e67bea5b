"""Test-mesh generators: Kuhn-triangulated balls, ellipsoids, blobs, and the disk twist map."""

import itertools
import logging

import numpy as np

from vsem.complexcore.simplicial import (
    PiecewiseAffineMap,
    SimplicialComplex,
    signed_volumes,
)
from vsem.errors import DimensionMismatchError, MeshValidationError

logger = logging.getLogger(__name__)

SUPPORTED_DIMS = (2, 3, 4)


def _permutation_parity(perm: tuple[int, ...]) -> int:
    inversions = sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j])
    return inversions % 2


def kuhn_cube_triangulation(n: int, resolution: int) -> SimplicialComplex:
    """Freudenthal/Kuhn triangulation of [-1, 1]^n with ``resolution`` cells per axis.

    Every cell is split into n! simplices along its main diagonal; odd
    permutations get their first two vertices swapped so all signed volumes
    are positive.
    """
    axis = np.linspace(-1.0, 1.0, resolution + 1)
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    shape = (resolution + 1,) * n
    cells = np.stack(
        np.meshgrid(*([np.arange(resolution)] * n), indexing="ij"), axis=-1
    ).reshape(-1, n)

    blocks = []
    for perm in itertools.permutations(range(n)):
        steps = np.zeros((n + 1, n), dtype=np.int64)
        for depth, ax in enumerate(perm, start=1):
            steps[depth:, ax] += 1
        corners = cells[:, None, :] + steps[None, :, :]
        ids = np.ravel_multi_index(tuple(np.moveaxis(corners, -1, 0)), shape)
        if _permutation_parity(perm):
            ids[:, [0, 1]] = ids[:, [1, 0]]
        blocks.append(ids)
    simplices = np.concatenate(blocks, axis=0)
    return SimplicialComplex(grid, simplices)


def _max_to_euclidean(points: np.ndarray) -> np.ndarray:
    """Radial map sending the max-norm sphere of radius t to the 2-norm sphere of radius t."""
    sup = np.max(np.abs(points), axis=1)
    euclid = np.linalg.norm(points, axis=1)
    scale = np.ones_like(sup)
    nonzero = euclid > 0
    scale[nonzero] = sup[nonzero] / euclid[nonzero]
    out = points * scale[:, None]
    on_sphere = sup == 1.0
    out[on_sphere] = points[on_sphere] / euclid[on_sphere, None]
    return out


def _ensure_positive(complex: SimplicialComplex, what: str) -> SimplicialComplex:
    volumes = signed_volumes(complex.vertices, complex.simplices)
    if not np.all(volumes > 0):
        raise MeshValidationError(f"{what}: {int(np.sum(volumes <= 0))} simplices lost orientation")
    return complex


def gen_ball_mesh(n: int, resolution: int) -> SimplicialComplex:
    """Topological n-ball with every boundary vertex on the unit sphere."""
    if n not in SUPPORTED_DIMS:
        raise DimensionMismatchError(f"ball meshes are generated for n in {SUPPORTED_DIMS}, got {n}")
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    cube = kuhn_cube_triangulation(n, resolution)
    ball = cube.with_vertices(_max_to_euclidean(np.array(cube.vertices)))
    logger.info(f"Generated {n}-ball mesh: N={ball.n_vertices}, m={ball.n_simplices}.")
    return _ensure_positive(ball, "ball mesh")


def gen_ellipsoid_mesh(axes, resolution: int) -> SimplicialComplex:
    axes = np.asarray(axes, dtype=np.float64).reshape(-1)
    if not np.all(axes > 0):
        raise ValueError(f"ellipsoid axes must be positive, got {axes.tolist()}")
    ball = gen_ball_mesh(axes.size, resolution)
    return ball.with_vertices(ball.vertices * axes[None, :])


def gen_blob_mesh(n: int, resolution: int, amplitude: float = 0.15, seed: int = 0) -> SimplicialComplex:
    """A ball whose radius varies smoothly with direction.

    r(u) = 1 + amplitude * phi(u) with phi a seeded sum of a few low-frequency
    plane waves on the unit sphere, normalized to max |phi| <= 1. A point at
    radius t moves to t (1 + amplitude * phi(u) t), which is continuous at the
    centre and strictly increasing in t for amplitude < 0.5.
    """
    if not 0 <= amplitude < 0.5:
        raise ValueError(f"amplitude must be in [0, 0.5), got {amplitude}")
    ball = gen_ball_mesh(n, resolution)
    rng = np.random.default_rng(seed)
    waves = 4
    freqs = rng.normal(scale=1.5, size=(waves, n))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=waves)
    weights = rng.uniform(0.5, 1.0, size=waves)
    weights /= weights.sum()

    points = np.array(ball.vertices)
    radius = np.linalg.norm(points, axis=1)
    directions = np.zeros_like(points)
    nonzero = radius > 0
    directions[nonzero] = points[nonzero] / radius[nonzero, None]
    phi = np.cos(directions @ freqs.T + phases) @ weights
    blob = ball.with_vertices(points * (1.0 + amplitude * phi * radius)[:, None])
    return _ensure_positive(blob, "blob mesh")


def disk_twist_map(complex: SimplicialComplex, k: float) -> PiecewiseAffineMap:
    """Polar twist (r, theta) -> (r, theta + k r); area preserving in the continuum."""
    if complex.ambient_dim != 2:
        raise DimensionMismatchError("the twist map is defined on planar meshes")
    points = complex.vertices
    radius = np.linalg.norm(points, axis=1)
    angle = k * radius
    cos, sin = np.cos(angle), np.sin(angle)
    images = np.column_stack(
        [cos * points[:, 0] - sin * points[:, 1], sin * points[:, 0] + cos * points[:, 1]]
    )
    return PiecewiseAffineMap(images)
