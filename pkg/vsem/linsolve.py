"""Sparse symmetric solves: pinned-vertex Laplacian systems and bordered KKT systems.

Direct solves go through ``SparseFactorization`` (SuperLU on a fixed
ordering); systems above ``Settings.cg_threshold`` unknowns use Jacobi
preconditioned conjugate gradients instead.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sla
from scipy.sparse.csgraph import reverse_cuthill_mckee

from vsem.config import get_settings
from vsem.errors import SingularSystemError

logger = logging.getLogger(__name__)

PIVOT_RATIO_LIMIT = 1e-14
DENSE_RANK_LIMIT = 3000
SADDLE_SHIFT = 1e-10

_ORDERINGS: dict[tuple, np.ndarray] = {}
_MAX_CACHED_ORDERINGS = 32


def _as_csr(matrix) -> sparse.csr_matrix:
    matrix = getattr(matrix, "matrix", matrix)
    return sparse.csr_matrix(matrix)


def _pattern_key(matrix: sparse.csr_matrix) -> tuple:
    return (matrix.shape, hash(matrix.indptr.tobytes()), hash(matrix.indices.tobytes()))


def rcm_ordering(matrix: sparse.csr_matrix) -> np.ndarray:
    """Reverse Cuthill-McKee permutation, computed once per sparsity pattern."""
    matrix = matrix.tocsr()
    matrix.sort_indices()
    key = _pattern_key(matrix)
    perm = _ORDERINGS.get(key)
    if perm is None:
        perm = np.asarray(reverse_cuthill_mckee(matrix, symmetric_mode=True), dtype=np.int64)
        if len(_ORDERINGS) >= _MAX_CACHED_ORDERINGS:
            _ORDERINGS.clear()
        _ORDERINGS[key] = perm
    return perm


def estimate_rank_deficiency(matrix) -> int | None:
    """Dense rank deficit for small systems; None when too large to check."""
    matrix = _as_csr(matrix)
    size = matrix.shape[0]
    if size > DENSE_RANK_LIMIT:
        return None
    return int(size - np.linalg.matrix_rank(matrix.toarray()))


class SparseFactorization:
    """An LU factorization of a square sparse matrix, immutable once built.

    ``ordering="rcm"`` applies a cached reverse Cuthill-McKee permutation
    (symmetric Laplacians); ``"colamd"`` leaves column ordering to SuperLU
    (bordered systems with dense border columns).
    """

    def __init__(self, matrix, ordering: str = "rcm"):
        matrix = _as_csr(matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"matrix must be square, got {matrix.shape}")
        self.shape = matrix.shape
        self._matrix = matrix
        if ordering == "rcm":
            self._perm = rcm_ordering(matrix)
            permuted = matrix[self._perm][:, self._perm].tocsc()
            spec = "NATURAL"
        elif ordering == "colamd":
            self._perm = None
            permuted = matrix.tocsc()
            spec = "COLAMD"
        else:
            raise ValueError(f"unknown ordering {ordering!r}")
        try:
            self._lu = sla.splu(permuted, permc_spec=spec)
        except RuntimeError as exc:
            raise SingularSystemError(f"factorization failed: {exc}", estimate_rank_deficiency(matrix))
        pivots = np.abs(self._lu.U.diagonal())
        largest = float(pivots.max()) if pivots.size else 0.0
        self.pivot_ratio = float(pivots.min()) / largest if largest > 0 else 0.0
        if self.pivot_ratio < PIVOT_RATIO_LIMIT:
            raise SingularSystemError(
                f"near-singular matrix (pivot ratio {self.pivot_ratio:.2e})",
                estimate_rank_deficiency(matrix),
            )
        logger.debug(f"Factorized {self.shape[0]}x{self.shape[1]} system, pivot ratio {self.pivot_ratio:.2e}.")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=np.float64)
        if self._perm is None:
            return self._lu.solve(rhs)
        solution = np.empty_like(rhs)
        solution[self._perm] = self._lu.solve(np.ascontiguousarray(rhs[self._perm]))
        return solution


def _relative_residual(matrix, solution: np.ndarray, rhs: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(rhs))) if rhs.size else 0.0, 1.0)
    residual = matrix @ solution - rhs
    return float(np.max(np.abs(residual))) / scale if residual.size else 0.0


def _check_residual(matrix, solution: np.ndarray, rhs: np.ndarray, what: str) -> float:
    if not np.all(np.isfinite(solution)):
        raise SingularSystemError(f"{what}: non-finite solution", estimate_rank_deficiency(matrix))
    residual = _relative_residual(matrix, solution, rhs)
    limit = get_settings().residual_limit
    if residual > limit:
        raise SingularSystemError(
            f"{what}: residual {residual:.2e} exceeds {limit:.0e}",
            estimate_rank_deficiency(matrix),
        )
    logger.debug(f"{what}: relative residual {residual:.2e}.")
    return residual


def _cg_solve(matrix: sparse.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    diagonal = matrix.diagonal()
    if np.any(diagonal <= 0):
        raise SingularSystemError("CG needs a positive diagonal")
    preconditioner = sparse.diags(1.0 / diagonal)
    columns = rhs.reshape(rhs.shape[0], -1)
    out = np.empty_like(columns)
    for c in range(columns.shape[1]):
        x, info = sla.cg(matrix, columns[:, c], rtol=1e-12, atol=0.0, maxiter=10 * matrix.shape[0], M=preconditioner)
        if info < 0:
            raise SingularSystemError(f"CG breakdown (info={info})")
        if info > 0:
            logger.warning(f"CG stopped after {info} iterations without reaching the tolerance.")
        out[:, c] = x
    return out.reshape(rhs.shape)


def solve_symmetric(matrix, rhs: np.ndarray, what: str = "linear solve") -> np.ndarray:
    matrix = _as_csr(matrix)
    rhs = np.asarray(rhs, dtype=np.float64)
    if matrix.shape[0] > get_settings().cg_threshold:
        logger.info(f"{what}: {matrix.shape[0]} unknowns, using preconditioned CG.")
        solution = _cg_solve(matrix, rhs)
    else:
        solution = SparseFactorization(matrix).solve(rhs)
    _check_residual(matrix, solution, rhs, what)
    return solution


def solve_pinned(L, rhs: np.ndarray, pinned_idx, pinned_vals) -> np.ndarray:
    """Solve L x = rhs on the free rows with x fixed on ``pinned_idx``.

    [L]_FF x_F = rhs_F - [L]_FP x_P; the returned matrix holds
    ``pinned_vals`` on the pinned rows.
    """
    matrix = _as_csr(L)
    rhs = np.asarray(rhs, dtype=np.float64)
    size = matrix.shape[0]
    pinned_idx = np.asarray(pinned_idx, dtype=np.int64).reshape(-1)
    if rhs.shape[0] != size:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, matrix has {size}")
    if pinned_idx.size and (pinned_idx.min() < 0 or pinned_idx.max() >= size):
        raise ValueError("pinned index outside the matrix")
    if np.unique(pinned_idx).size != pinned_idx.size:
        raise ValueError("pinned indices repeat")
    trailing = rhs.shape[1:]
    pinned_vals = np.broadcast_to(
        np.asarray(pinned_vals, dtype=np.float64), (pinned_idx.size, *trailing)
    )
    free = np.setdiff1d(np.arange(size), pinned_idx)
    solution = np.empty_like(rhs)
    solution[pinned_idx] = pinned_vals
    if not free.size:
        return solution
    reduced = matrix[free][:, free]
    reduced_rhs = rhs[free] - matrix[free][:, pinned_idx] @ pinned_vals
    solution[free] = solve_symmetric(reduced, reduced_rhs, what="pinned solve")
    return solution


@dataclass(frozen=True, eq=False)
class SaddleSolution:
    x: np.ndarray
    multipliers: np.ndarray
    regularized: bool
    residual: float


def _bordered(H: sparse.spmatrix, A: sparse.spmatrix) -> sparse.csc_matrix:
    return sparse.bmat([[H, A], [A.T, None]], format="csc")


def solve_saddle(H, A_cols, rhs: np.ndarray) -> SaddleSolution:
    """Solve [[H, A], [A^T, 0]] [x; y] = rhs.

    On a near-singular bordered matrix the solve is retried once with
    H + 1e-10 I; a rank-deficient border stays singular and raises.
    """
    H = sparse.csr_matrix(getattr(H, "matrix", H))
    A = sparse.csr_matrix(A_cols)
    if A.ndim == 2 and A.shape[0] != H.shape[0] and A.shape[1] == H.shape[0]:
        A = A.T.tocsr()
    size, n_constraints = H.shape[0], A.shape[1]
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != size + n_constraints:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, bordered system has {size + n_constraints}")
    regularized = False
    kkt = _bordered(H, A)
    try:
        solution = SparseFactorization(kkt, ordering="colamd").solve(rhs)
        _check_residual(kkt, solution, rhs, "saddle solve")
    except SingularSystemError as exc:
        logger.warning(f"Saddle system near-singular ({exc}); retrying with a {SADDLE_SHIFT:.0e} diagonal shift.")
        regularized = True
        shifted = H + SADDLE_SHIFT * sparse.identity(size, format="csr")
        kkt = _bordered(shifted, A)
        solution = SparseFactorization(kkt, ordering="colamd").solve(rhs)
        _check_residual(kkt, solution, rhs, "regularized saddle solve")
    residual = _relative_residual(kkt, solution, rhs)
    return SaddleSolution(solution[:size], solution[size:], regularized, residual)
