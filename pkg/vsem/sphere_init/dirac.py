"""Spherical Dirac map of a closed (n-1)-complex in R^n.

A derivative-of-delta source is placed in one well-shaped simplex; the
resulting pinned Laplace problem is solved in the stereographic plane and
mapped back to the sphere.
"""

import logging
import math

import numpy as np
from scipy.sparse.csgraph import shortest_path

from vsem.complexcore.simplicial import (
    PiecewiseAffineMap,
    SimplicialComplex,
    cone_signed_volumes,
    edge_matrices,
    simplex_volumes,
)
from vsem.complexcore.topology import vertex_adjacency
from vsem.complexcore.untangle import untangle
from vsem.energy.laplacian import assemble_dirichlet_laplacian
from vsem.errors import DegenerateSimplexError, DimensionMismatchError
from vsem.linsolve import solve_pinned
from vsem.sphere_init.stereo import stereo_unproject

logger = logging.getLogger(__name__)


def regularity(complex: SimplicialComplex) -> np.ndarray:
    """Inradius / circumradius per top simplex, within each simplex's affine hull.

    The regular k-simplex attains the maximum 1/k; zero for degenerate ones.
    """
    points, simplices = complex.vertices, complex.simplices
    k = complex.top_dim
    if k < 1:
        raise DimensionMismatchError("regularity needs simplices of dimension >= 1")
    volumes = simplex_volumes(points, simplices)
    facet_area = np.zeros(len(simplices))
    for i in range(k + 1):
        facet_area += simplex_volumes(points, np.delete(simplices, i, axis=1))
    inradius = np.divide(k * volumes, facet_area, out=np.zeros_like(volumes), where=facet_area > 0)

    edges = edge_matrices(points, simplices)
    gram = np.einsum("mik,mil->mkl", edges, edges)
    half_diag = 0.5 * np.diagonal(gram, axis1=1, axis2=2)
    circumradius = np.full(len(simplices), np.inf)
    valid = volumes > 0
    if np.any(valid):
        coeffs = np.linalg.solve(gram[valid], half_diag[valid][..., None])[..., 0]
        offsets = np.einsum("mik,mk->mi", edges[valid], coeffs)
        circumradius[valid] = np.linalg.norm(offsets, axis=1)
    return np.where(valid, inradius / circumradius, 0.0)


def most_regular_simplex(complex: SimplicialComplex) -> int:
    """Index of the maximal inradius/circumradius ratio; lowest index on ties."""
    ratios = regularity(complex)
    best = int(np.argmax(ratios))
    if ratios[best] <= 0:
        raise DegenerateSimplexError("every simplex is degenerate", best)
    return best


def pin_vertex(complex: SimplicialComplex, simplex_id: int) -> int:
    """Vertex at maximal graph distance from the simplex (lowest index on ties)."""
    sources = complex.simplices[simplex_id]
    distances = shortest_path(vertex_adjacency(complex), unweighted=True, indices=sources)
    nearest = distances.min(axis=0)
    nearest[~np.isfinite(nearest)] = -1.0
    return int(np.argmax(nearest))


def dirac_rhs(complex: SimplicialComplex, simplex_id: int) -> np.ndarray:
    """Right-hand side b (N x k): barycentric gradients of the source simplex in its QR frame.

    With E = QR the edge matrix of tau_p, row i >= 1 of b is row i-1 of R^-1
    (grad alpha_i expressed in the orthonormal basis Q), b_0 is minus their
    sum, and every other row is zero.
    """
    k = complex.top_dim
    corners = complex.vertices[complex.simplices[simplex_id]]
    edges = (corners[1:] - corners[0]).T
    _, r = np.linalg.qr(edges, mode="reduced")
    volume = abs(float(np.prod(np.diagonal(r)))) / math.factorial(k)
    scale = float(np.max(np.linalg.norm(edges, axis=0))) ** k / math.factorial(k)
    if not volume > 1e-14 * scale:
        raise DegenerateSimplexError(f"source simplex {simplex_id} is degenerate", simplex_id)
    local = np.linalg.inv(r)
    rows = np.vstack([-local.sum(axis=0), local])
    b = np.zeros((complex.n_vertices, k))
    np.add.at(b, complex.simplices[simplex_id], rows)
    return b


def orientation_signs(complex: SimplicialComplex, images: np.ndarray) -> np.ndarray:
    """Sign of each image facet's cone volume from the sphere centre."""
    return np.sign(cone_signed_volumes(images, complex.simplices))


def dirac_map(
    complex: SimplicialComplex,
    simplex_id: int | None = None,
    pin: int | None = None,
) -> PiecewiseAffineMap:
    """Dirac map onto S^(n-1).

    Mirrored if the majority of facets come out inverted; any facets still
    inverted are then untangled by moves along the sphere.
    """
    n = complex.ambient_dim
    if complex.top_dim != n - 1:
        raise DimensionMismatchError(
            f"the Dirac map needs an (n-1)-complex in R^n, got k={complex.top_dim}, n={n}"
        )
    if simplex_id is None:
        simplex_id = most_regular_simplex(complex)
    if pin is None:
        pin = pin_vertex(complex, simplex_id)
    logger.info(f"Dirac map: source simplex {simplex_id}, pinned vertex {pin}.")

    laplacian = assemble_dirichlet_laplacian(complex)
    b = dirac_rhs(complex, simplex_id)
    h = solve_pinned(laplacian, b, [pin], 0.0)
    h -= h.mean(axis=0)
    images = stereo_unproject(h)

    signs = orientation_signs(complex, images)
    if np.sum(signs < 0) > np.sum(signs > 0):
        images[:, 0] = -images[:, 0]
        logger.info("Dirac map came out mirrored; reflected the first coordinate.")
    flipped = int(np.sum(orientation_signs(complex, images) <= 0))
    if flipped:
        on_sphere = np.ones(complex.n_vertices, dtype=bool)
        result = untangle(
            complex.simplices, images, cone_signed_volumes, vertex_adjacency(complex), on_sphere, on_sphere
        )
        images = result.images
        logger.info(
            f"Dirac map: untangled {result.initial_flips} -> {result.remaining_flips} inverted facets "
            f"by moving {result.moved.size} vertices."
        )
        if result.remaining_flips:
            logger.warning(f"Dirac map has {result.remaining_flips} inverted facets.")
    return PiecewiseAffineMap(images)
