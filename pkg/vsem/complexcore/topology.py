"""Combinatorial queries: facets, boundary, links, Euler characteristic."""

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components as _components

from vsem.complexcore.simplicial import SimplicialComplex, cone_signed_volumes
from vsem.errors import NonManifoldError, TopologyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BoundaryExtraction:
    """The boundary complex plus the index split B (boundary) / I (interior).

    ``complex`` is indexed locally: local vertex t is global vertex
    ``boundary_idx[t]``.
    """

    complex: SimplicialComplex
    boundary_idx: np.ndarray
    interior_idx: np.ndarray


def oriented_facets(simplices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All (k-1)-facets, oriented as the simplicial boundary operator does.

    Returns ``(facets, owner)`` with facets of shape (m*(k+1), k) and the
    index of the owning simplex per facet.
    """
    m, width = simplices.shape
    facets = []
    for i in range(width):
        facet = np.delete(simplices, i, axis=1)
        if i % 2 == 1 and facet.shape[1] >= 2:
            facet = facet[:, [1, 0, *range(2, facet.shape[1])]]
        facets.append(facet)
    owner = np.tile(np.arange(m), width)
    return np.concatenate(facets, axis=0), owner


def facet_incidence(simplices: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per oriented facet, the id of its unordered facet class and the class sizes."""
    facets, owner = oriented_facets(simplices)
    keys = np.sort(facets, axis=1)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    return facets, inverse.reshape(-1), counts


def boundary_complex(complex: SimplicialComplex) -> BoundaryExtraction:
    """Extract the facets incident to exactly one top simplex, outward oriented."""
    facets, inverse, counts = facet_incidence(complex.simplices)
    if np.any(counts > 2):
        raise NonManifoldError(f"{int(np.sum(counts > 2))} facets shared by more than two simplices")
    boundary_facets = facets[counts[inverse] == 1]
    boundary_idx = np.unique(boundary_facets)
    interior_mask = np.ones(complex.n_vertices, dtype=bool)
    interior_mask[boundary_idx] = False
    interior_idx = np.flatnonzero(interior_mask)
    local = np.full(complex.n_vertices, -1, dtype=np.int64)
    local[boundary_idx] = np.arange(boundary_idx.size)
    if boundary_facets.size:
        surface = SimplicialComplex(complex.vertices[boundary_idx], local[boundary_facets])
    else:
        surface = SimplicialComplex(
            np.zeros((0, complex.ambient_dim)),
            np.zeros((0, max(complex.top_dim, 1)), dtype=np.int64),
        )
    logger.debug(
        f"Boundary extraction: {len(boundary_facets)} facets, "
        f"{boundary_idx.size} boundary / {interior_idx.size} interior vertices."
    )
    return BoundaryExtraction(surface, boundary_idx, interior_idx)


def vertex_link(complex: SimplicialComplex, vertex_id: int) -> np.ndarray:
    """Faces opposite ``vertex_id`` in its incident top simplices, shape (d, k)."""
    rows = np.flatnonzero(np.any(complex.simplices == vertex_id, axis=1))
    star = complex.simplices[rows]
    return np.array([s[s != vertex_id] for s in star], dtype=np.int64).reshape(len(rows), -1)


def euler_characteristic(simplices: np.ndarray) -> int:
    """V - E + F - ... over all faces of the pure complex spanned by ``simplices``."""
    simplices = np.sort(np.asarray(simplices), axis=1)
    if not simplices.size:
        return 0
    width = simplices.shape[1]
    chi = 0
    for size in range(1, width + 1):
        faces = np.concatenate(
            [simplices[:, list(c)] for c in combinations(range(width), size)], axis=0
        )
        count = len(np.unique(faces, axis=0))
        chi += count if size % 2 == 1 else -count
    return chi


def is_closed(complex: SimplicialComplex) -> bool:
    """Every facet is shared by exactly two top simplices."""
    if not complex.n_simplices:
        return False
    _, _, counts = facet_incidence(complex.simplices)
    return bool(np.all(counts == 2))


def check_sphere_topology(complex: SimplicialComplex) -> None:
    """Closed, connected, and with the Euler characteristic of S^k."""
    k = complex.top_dim
    if not is_closed(complex):
        raise TopologyError("complex is not closed: some facet is not shared by two simplices")
    expected = 1 + (-1) ** k
    chi = euler_characteristic(complex.simplices)
    if chi != expected:
        raise TopologyError(f"Euler characteristic {chi} does not match the {k}-sphere ({expected})")
    if connected_components(complex) != 1:
        raise TopologyError("complex is not connected")


def check_ball_topology(complex: SimplicialComplex) -> BoundaryExtraction:
    """The complex is a k-ball candidate: chi = 1 and its boundary is a (k-1)-sphere."""
    extraction = boundary_complex(complex)
    if extraction.complex.n_simplices == 0:
        raise TopologyError("complex has no boundary")
    chi = euler_characteristic(complex.simplices)
    if chi != 1:
        raise TopologyError(f"Euler characteristic {chi} does not match a ball (1)")
    check_sphere_topology(extraction.complex)
    return extraction


def orient_closed_surface(complex: SimplicialComplex) -> tuple[SimplicialComplex, bool]:
    """Make a closed (n-1)-complex in R^n outward oriented as a whole.

    Assumes a consistent orientation between neighbours; only the global sign
    is decided, from the enclosed volume seen from the vertex centroid.
    """
    centroid = complex.vertices.mean(axis=0)
    enclosed = float(cone_signed_volumes(complex.vertices, complex.simplices, centroid).sum())
    if enclosed >= 0:
        return complex, False
    simplices = complex.simplices.copy()
    simplices[:, [0, 1]] = simplices[:, [1, 0]]
    logger.info("Reversed the orientation of an inward-oriented closed surface.")
    return SimplicialComplex(complex.vertices, simplices), True


def vertex_adjacency(complex: SimplicialComplex) -> sparse.csr_matrix:
    """Symmetric 0/1 adjacency of the 1-skeleton (no diagonal)."""
    n = complex.n_vertices
    pairs = list(combinations(range(complex.top_dim + 1), 2))
    if not pairs:
        return sparse.csr_matrix((n, n))
    rows = np.concatenate([complex.simplices[:, i] for i, _ in pairs])
    cols = np.concatenate([complex.simplices[:, j] for _, j in pairs])
    data = np.ones(2 * rows.size)
    adjacency = sparse.coo_matrix(
        (data, (np.concatenate([rows, cols]), np.concatenate([cols, rows]))), shape=(n, n)
    ).tocsr()
    adjacency.data[:] = 1.0
    return adjacency


def connected_components(complex: SimplicialComplex) -> int:
    used = np.unique(complex.simplices)
    adjacency = vertex_adjacency(complex)[used][:, used]
    count, _ = _components(adjacency, directed=False)
    return int(count)
