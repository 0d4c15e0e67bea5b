"""Cotangent-weight Laplacians on simplicial k-complexes in any dimension.

For a k-simplex sigma with barycentric coordinate gradients grad(alpha_i)
(taken inside the simplex's affine hull), the per-simplex cotangent weight of
the edge (i, j) is

    w_ij = -|sigma| <grad alpha_i, grad alpha_j>
         = |sigma_{-ij}| cot(theta_ij) / (k (k - 1)),

where theta_ij is the dihedral angle between the facets opposite v_i and v_j
and sigma_{-ij} is the (k-2)-face without v_i and v_j (a 0-simplex has
volume 1, which gives the familiar cot/2 weights on triangles).
"""

import logging
import math
import weakref
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import sparse

from vsem.complexcore.simplicial import (
    DEGENERATE_RELATIVE_VOLUME,
    MeasuredComplex,
    PiecewiseAffineMap,
    SimplicialComplex,
    simplex_volumes,
)
from vsem.errors import CollapsedSimplexError, DegenerateSimplexError

logger = logging.getLogger(__name__)


def barycentric_gradients(points: np.ndarray, simplices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the barycentric coordinates and k-volumes of every simplex.

    Uses the thin QR factorization E = QR of each edge matrix, so the
    gradients live in the affine hull: grad(alpha_i) = row i-1 of R^-1 Q^T for
    i >= 1, and grad(alpha_0) = -sum of the others.

    Returns ``(grads, volumes)`` with shapes (m, k+1, n) and (m,).
    Raises CollapsedSimplexError if a simplex is numerically degenerate.
    """
    points = np.asarray(points, dtype=np.float64)
    corners = points[simplices]
    edges = np.transpose(corners[:, 1:, :] - corners[:, :1, :], (0, 2, 1))
    k = edges.shape[2]
    q, r = np.linalg.qr(edges, mode="reduced")
    diag = np.abs(np.diagonal(r, axis1=1, axis2=2))
    volumes = np.prod(diag, axis=1) / math.factorial(k)
    lengths = np.max(np.linalg.norm(edges, axis=1), axis=1)
    scale = np.where(lengths > 0, lengths, 1.0) ** k / math.factorial(k)
    bad = np.flatnonzero(volumes <= DEGENERATE_RELATIVE_VOLUME * scale)
    if bad.size:
        raise CollapsedSimplexError(int(bad[0]))
    local = np.linalg.solve(r, np.transpose(q, (0, 2, 1)))
    grads = np.concatenate([-local.sum(axis=1, keepdims=True), local], axis=1)
    return grads, volumes


def edge_pairs(k: int) -> list[tuple[int, int]]:
    return list(combinations(range(k + 1), 2))


def cotangent_weights(points: np.ndarray, simplices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-simplex cotangent weights, shape (m, (k+1)k/2), ordered as ``edge_pairs(k)``.

    Also returns the simplex volumes measured on ``points``.
    """
    grads, volumes = barycentric_gradients(points, simplices)
    k = simplices.shape[1] - 1
    pairs = edge_pairs(k)
    first = np.array([i for i, _ in pairs])
    second = np.array([j for _, j in pairs])
    inner = np.einsum("mpd,mpd->mp", grads[:, first, :], grads[:, second, :])
    return -volumes[:, None] * inner, volumes


def dihedral_cotangents(points: np.ndarray, simplices: np.ndarray, simplex_id: int) -> dict:
    """cot(theta_ij) for every vertex pair of one simplex (k >= 2).

    cos(theta_ij) = -<n_i, n_j> with n_i the inward unit normal of the facet
    opposite v_i, obtained from the QR-based barycentric gradients.
    """
    simplex = np.asarray(simplices)[[simplex_id]]
    k = simplex.shape[1] - 1
    if k < 2:
        raise ValueError("dihedral angles need simplices of dimension >= 2")
    try:
        grads, _ = barycentric_gradients(points, simplex)
    except CollapsedSimplexError:
        raise DegenerateSimplexError(f"simplex {simplex_id} has zero volume", simplex_id)
    normals = grads[0] / np.linalg.norm(grads[0], axis=1, keepdims=True)
    result = {}
    for i, j in edge_pairs(k):
        cos = -float(normals[i] @ normals[j])
        sin = math.sqrt(max(1.0 - cos * cos, 0.0))
        result[(i, j)] = cos / sin
    return result


class LaplacianAssembler:
    """Fixed-pattern assembly of vertex Laplacians for one simplex list.

    The CSR structure (vertex adjacency plus diagonal) is built once; every
    assembly only scatters new weights into the data array, so all matrices
    produced share ``indices``/``indptr`` and a single fill-reducing ordering.
    """

    def __init__(self, n_vertices: int, simplices: np.ndarray):
        self.n_vertices = n_vertices
        self.k = simplices.shape[1] - 1
        pairs = edge_pairs(self.k)
        vi = np.concatenate([simplices[:, i] for i, _ in pairs])
        vj = np.concatenate([simplices[:, j] for _, j in pairs])
        diag = np.arange(n_vertices)
        rows = np.concatenate([vi, vj, vi, vj, diag])
        cols = np.concatenate([vj, vi, vi, vj, diag])
        pattern = sparse.coo_matrix(
            (np.ones(rows.size), (rows, cols)), shape=(n_vertices, n_vertices)
        ).tocsr()
        pattern.sort_indices()
        self.indptr = pattern.indptr
        self.indices = pattern.indices
        self.nnz = self.indices.size
        self._slots = self._locate(rows, cols)
        self._signs = np.concatenate(
            [-np.ones(2 * vi.size), np.ones(2 * vi.size), np.zeros(n_vertices)]
        )

    def _locate(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        n = np.int64(self.n_vertices)
        entry_rows = np.repeat(np.arange(self.n_vertices, dtype=np.int64), np.diff(self.indptr))
        keys = entry_rows * n + self.indices.astype(np.int64)
        return np.searchsorted(keys, rows.astype(np.int64) * n + cols.astype(np.int64))

    def assemble(self, weights: np.ndarray) -> sparse.csr_matrix:
        """Laplacian with off-diagonals -sum(w) and zero row sums."""
        flat = np.asarray(weights, dtype=np.float64).T.reshape(-1)
        values = np.concatenate([flat, flat, flat, flat, np.zeros(self.n_vertices)]) * self._signs
        data = np.bincount(self._slots, weights=values, minlength=self.nnz)
        return sparse.csr_matrix(
            (data, self.indices.copy(), self.indptr.copy()),
            shape=(self.n_vertices, self.n_vertices),
        )

    @property
    def pattern(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(
            (np.ones(self.nnz), self.indices.copy(), self.indptr.copy()),
            shape=(self.n_vertices, self.n_vertices),
        )


_ASSEMBLERS: "weakref.WeakKeyDictionary[SimplicialComplex, LaplacianAssembler]" = (
    weakref.WeakKeyDictionary()
)


def assembler_for(complex: SimplicialComplex) -> LaplacianAssembler:
    assembler = _ASSEMBLERS.get(complex)
    if assembler is None:
        assembler = LaplacianAssembler(complex.n_vertices, complex.simplices)
        _ASSEMBLERS[complex] = assembler
    return assembler


@dataclass(frozen=True, eq=False)
class SparseLaplacian:
    """A symmetric, zero-row-sum vertex Laplacian and its per-simplex edge weights."""

    matrix: sparse.csr_matrix
    simplex_weights: np.ndarray

    def __matmul__(self, other):
        return self.matrix @ other

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def negative_weight_fraction(self) -> float:
        if not self.simplex_weights.size:
            return 0.0
        return float(np.mean(self.simplex_weights < 0))

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def _laplacian(complex: SimplicialComplex, weights: np.ndarray) -> SparseLaplacian:
    return SparseLaplacian(assembler_for(complex).assemble(weights), weights)


def assemble_dirichlet_laplacian(complex: SimplicialComplex) -> SparseLaplacian:
    """L_D on the complex's own geometry."""
    try:
        weights, _ = cotangent_weights(complex.vertices, complex.simplices)
    except CollapsedSimplexError as exc:
        raise DegenerateSimplexError(f"simplex {exc.simplex_id} is degenerate", exc.simplex_id)
    return _laplacian(complex, weights)


def assemble_image_dirichlet_laplacian(complex: SimplicialComplex, fmap: PiecewiseAffineMap) -> SparseLaplacian:
    """L_D(f): the Dirichlet Laplacian of the image complex f(M)."""
    fmap.check_domain(complex)
    weights, _ = cotangent_weights(fmap.images, complex.simplices)
    return _laplacian(complex, weights)


def assemble_vs_laplacian(measured: MeasuredComplex, fmap: PiecewiseAffineMap) -> SparseLaplacian:
    """L_V(f): image cotangent weights divided by the stretch factor mu / |f(sigma)|."""
    complex = measured.complex
    fmap.check_domain(complex)
    weights, image_volumes = cotangent_weights(fmap.images, complex.simplices)
    return _laplacian(complex, weights * (image_volumes / measured.masses)[:, None])


def assemble_both(measured: MeasuredComplex, fmap: PiecewiseAffineMap) -> tuple[SparseLaplacian, SparseLaplacian, np.ndarray]:
    """(L_V(f), L_D(f), image volumes) from a single weight computation."""
    complex = measured.complex
    fmap.check_domain(complex)
    weights, image_volumes = cotangent_weights(fmap.images, complex.simplices)
    l_v = _laplacian(complex, weights * (image_volumes / measured.masses)[:, None])
    l_d = _laplacian(complex, weights)
    return l_v, l_d, image_volumes


def image_volumes(complex: SimplicialComplex, fmap: PiecewiseAffineMap) -> np.ndarray:
    fmap.check_domain(complex)
    return simplex_volumes(fmap.images, complex.simplices)
