"""Simplicial complexes embedded in R^n, maps on them, and simplex geometry."""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from vsem.errors import (
    CollapsedSimplexError,
    DegenerateSimplexError,
    DimensionMismatchError,
    MeshValidationError,
)

logger = logging.getLogger(__name__)

# Simplices smaller than this fraction of the mean volume are rejected at load.
DEGENERATE_RELATIVE_VOLUME = 1e-14


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """A pure k-complex: N vertices in R^n and m oriented k-simplices.

    Indices are 0-based. Instances are immutable; every geometric quantity is
    derived from ``vertices`` and ``simplices``.
    """

    vertices: np.ndarray
    simplices: np.ndarray

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=np.float64)
        simplices = np.array(self.simplices, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] < 1:
            raise DimensionMismatchError("vertices must be an N x n array")
        if simplices.ndim != 2 or simplices.shape[1] < 1:
            raise DimensionMismatchError("simplices must be an m x (k+1) array")
        k = simplices.shape[1] - 1
        if k > vertices.shape[1]:
            raise DimensionMismatchError(
                f"top dimension {k} exceeds ambient dimension {vertices.shape[1]}"
            )
        if simplices.size and (simplices.min() < 0 or simplices.max() >= len(vertices)):
            raise MeshValidationError("simplex index outside [0, N)")
        if k > 0 and simplices.size:
            ordered = np.sort(simplices, axis=1)
            if np.any(ordered[:, 1:] == ordered[:, :-1]):
                raise MeshValidationError("simplex with repeated vertex index")
        object.__setattr__(self, "vertices", _frozen(vertices))
        object.__setattr__(self, "simplices", _frozen(simplices))

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def top_dim(self) -> int:
        return self.simplices.shape[1] - 1

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_simplices(self) -> int:
        return self.simplices.shape[0]

    @cached_property
    def volumes(self) -> np.ndarray:
        return _frozen(simplex_volumes(self.vertices, self.simplices))

    def with_vertices(self, vertices: np.ndarray) -> "SimplicialComplex":
        return SimplicialComplex(vertices, self.simplices)

    def __repr__(self) -> str:
        return (
            f"SimplicialComplex(k={self.top_dim}, n={self.ambient_dim}, "
            f"N={self.n_vertices}, m={self.n_simplices})"
        )


@dataclass(frozen=True, eq=False)
class MeasuredComplex:
    """A complex with a positive density per top simplex; mass = density * volume."""

    complex: SimplicialComplex
    density: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.density is None:
            density = np.ones(self.complex.n_simplices)
        else:
            density = np.array(self.density, dtype=np.float64).reshape(-1)
        if density.shape != (self.complex.n_simplices,):
            raise DimensionMismatchError(
                f"density has {density.size} entries, complex has {self.complex.n_simplices} simplices"
            )
        if not np.all(density > 0):
            raise MeshValidationError("density must be positive on every simplex")
        object.__setattr__(self, "density", _frozen(density))
        if not self.masses.sum() > 0:
            raise MeshValidationError("total mass must be positive")

    @classmethod
    def from_masses(cls, complex: SimplicialComplex, masses: np.ndarray) -> "MeasuredComplex":
        masses = np.asarray(masses, dtype=np.float64)
        volumes = complex.volumes
        if np.any(volumes <= 0):
            raise DegenerateSimplexError("cannot derive a density on a zero-volume simplex")
        return cls(complex, masses / volumes)

    @cached_property
    def masses(self) -> np.ndarray:
        return _frozen(self.density * self.complex.volumes)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())


@dataclass(frozen=True, eq=False)
class PiecewiseAffineMap:
    """Vertex images f (N x n); affine on each simplex by barycentric interpolation."""

    images: np.ndarray

    def __post_init__(self):
        images = np.array(self.images, dtype=np.float64)
        if images.ndim != 2:
            raise DimensionMismatchError("map images must be an N x n array")
        object.__setattr__(self, "images", _frozen(images))

    @property
    def n_vertices(self) -> int:
        return self.images.shape[0]

    def check_domain(self, complex: SimplicialComplex) -> None:
        if self.n_vertices != complex.n_vertices:
            raise DimensionMismatchError(
                f"map has {self.n_vertices} rows, complex has {complex.n_vertices} vertices"
            )

    def image_complex(self, complex: SimplicialComplex) -> SimplicialComplex:
        self.check_domain(complex)
        return SimplicialComplex(self.images, complex.simplices)


# --- Vectorised geometry ---
def edge_matrices(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    """Stack of E = [v_1 - v_0, ..., v_k - v_0], shape (m, n, k)."""
    corners = points[simplices]
    return np.transpose(corners[:, 1:, :] - corners[:, :1, :], (0, 2, 1))


def simplex_volumes(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    """Unsigned k-volumes sqrt(det(E^T E)) / k!; a 0-simplex has volume 1."""
    points = np.asarray(points, dtype=np.float64)
    simplices = np.asarray(simplices)
    k = simplices.shape[1] - 1
    if k == 0:
        return np.ones(len(simplices))
    edges = edge_matrices(points, simplices)
    if k == points.shape[1]:
        dets = np.abs(np.linalg.det(edges))
    else:
        gram = np.einsum("mik,mil->mkl", edges, edges)
        dets = np.sqrt(np.clip(np.linalg.det(gram), 0.0, None))
    return dets / math.factorial(k)


def signed_volumes(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    k = simplices.shape[1] - 1
    if k != points.shape[1]:
        raise DimensionMismatchError(
            f"signed volume needs top dimension == ambient dimension, got {k} != {points.shape[1]}"
        )
    return np.linalg.det(edge_matrices(points, simplices)) / math.factorial(k)


def cone_signed_volumes(points: np.ndarray, simplices: np.ndarray, apex=None) -> np.ndarray:
    """Signed n-volumes of the cones from ``apex`` (default origin) over (n-1)-simplices in R^n.

    Positive when the simplex is oriented with its normal pointing away from
    the apex; for a map onto the unit sphere this is the per-facet orientation.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[1]
    if simplices.shape[1] != n:
        raise DimensionMismatchError(
            f"cones need (n-1)-simplices in R^n, got {simplices.shape[1] - 1}-simplices in R^{n}"
        )
    apex = np.zeros(n) if apex is None else np.asarray(apex, dtype=np.float64)
    return np.linalg.det(points[simplices] - apex) / math.factorial(n)


def simplex_volume(complex: SimplicialComplex, simplex_id: int) -> float:
    return float(simplex_volumes(complex.vertices, complex.simplices[[simplex_id]])[0])


def signed_volume(complex: SimplicialComplex, simplex_id: int) -> float:
    return float(signed_volumes(complex.vertices, complex.simplices[[simplex_id]])[0])


def total_volume(complex: SimplicialComplex) -> float:
    return float(complex.volumes.sum())


def barycentric_coords(complex: SimplicialComplex, simplex_id: int, point) -> np.ndarray:
    """Affine-hull barycentric coordinates; they sum to 1 and reproduce the point."""
    corners = complex.vertices[complex.simplices[simplex_id]]
    edges = (corners[1:] - corners[0]).T
    gram = edges.T @ edges
    scale = max(float(np.trace(gram)), np.finfo(float).tiny)
    if abs(np.linalg.det(gram / scale)) < 1e-24:
        raise DegenerateSimplexError(f"simplex {simplex_id} is degenerate", simplex_id)
    local = np.linalg.solve(gram, edges.T @ (np.asarray(point, dtype=np.float64) - corners[0]))
    return np.concatenate([[1.0 - local.sum()], local])


def normalize_orientation(complex: SimplicialComplex) -> tuple[SimplicialComplex, int]:
    """Flip every negatively oriented top simplex; returns the flipped count."""
    if complex.top_dim != complex.ambient_dim:
        return complex, 0
    negative = signed_volumes(complex.vertices, complex.simplices) < 0
    count = int(negative.sum())
    if not count:
        return complex, 0
    simplices = complex.simplices.copy()
    simplices[negative, 0], simplices[negative, 1] = (
        complex.simplices[negative, 1],
        complex.simplices[negative, 0],
    )
    logger.info(f"Orientation normalization flipped {count} simplices.")
    return SimplicialComplex(complex.vertices, simplices), count


def check_nondegenerate(complex: SimplicialComplex) -> None:
    volumes = complex.volumes
    if not len(volumes):
        return
    threshold = DEGENERATE_RELATIVE_VOLUME * float(volumes.mean())
    bad = np.flatnonzero(volumes <= threshold)
    if bad.size:
        raise DegenerateSimplexError(
            f"{bad.size} degenerate simplices (first: {bad[0]}, volume {volumes[bad[0]]:.3e})",
            int(bad[0]),
        )


def check_image_volumes(volumes: np.ndarray, reference: float | None = None) -> None:
    """Raise CollapsedSimplexError on the first (numerically) zero image volume."""
    scale = reference if reference is not None else float(np.mean(volumes)) if len(volumes) else 0.0
    bad = np.flatnonzero(volumes <= DEGENERATE_RELATIVE_VOLUME * scale)
    if bad.size:
        raise CollapsedSimplexError(int(bad[0]))
