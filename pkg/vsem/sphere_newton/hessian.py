"""Finite-difference Hessians on a known vertex sparsity pattern.

Unknowns are the column-major vec(g). The Jacobian column of (d, i) can only
be nonzero on rows (d', j) with j in the closed neighbourhood of i, so all
vertices of one distance-2 colour class are perturbed together.
"""

import logging
from collections.abc import Callable

import numpy as np
from scipy import sparse

from vsem.complexcore.simplicial import MeasuredComplex
from vsem.config import get_settings
from vsem.energy.laplacian import assembler_for
from vsem.sphere_newton.kkt import KKTState, stationarity, unvec, vec

logger = logging.getLogger(__name__)


def distance2_coloring(pattern: sparse.spmatrix) -> np.ndarray:
    """Greedy colouring in which vertices within two edges of each other differ."""
    closed = sparse.csr_matrix(pattern, dtype=np.float64)
    closed = (closed + sparse.identity(closed.shape[0], format="csr")).tocsr()
    closed.data[:] = 1.0
    two_hop = (closed @ closed).tocsr()
    colors = np.full(closed.shape[0], -1, dtype=np.int64)
    for vertex in range(closed.shape[0]):
        neighbours = two_hop.indices[two_hop.indptr[vertex] : two_hop.indptr[vertex + 1]]
        used = set(colors[neighbours][colors[neighbours] >= 0].tolist())
        color = 0
        while color in used:
            color += 1
        colors[vertex] = color
    return colors


def fd_hessian(
    residual: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    pattern: sparse.spmatrix,
    n_components: int,
    step: float | None = None,
    colors: np.ndarray | None = None,
) -> tuple[sparse.csr_matrix, float]:
    """Central-difference Jacobian of ``residual`` at ``x``, symmetrized.

    ``pattern`` is the N x N vertex pattern; the Jacobian is assumed to live
    inside ``ones(n_components, n_components) kron (pattern + I)``. Returns
    the symmetric matrix and the relative asymmetry of the raw estimate.
    """
    step = step or get_settings().fd_step
    closed = sparse.csr_matrix(pattern, dtype=np.float64)
    size = closed.shape[0]
    closed = (closed + sparse.identity(size, format="csr")).tocsr()
    closed.data[:] = 1.0
    if colors is None:
        colors = distance2_coloring(closed)
    x = np.asarray(x, dtype=np.float64)

    rows, cols, values = [], [], []
    for color in range(int(colors.max()) + 1):
        group = np.flatnonzero(colors == color)
        touch_rows, touch_cols = closed[:, group].nonzero()
        owners = group[touch_cols]
        for d in range(n_components):
            direction = np.zeros_like(x)
            direction[d * size + group] = 1.0
            diff = (residual(x + step * direction) - residual(x - step * direction)) / (2.0 * step)
            for d_row in range(n_components):
                rows.append(d_row * size + touch_rows)
                cols.append(d * size + owners)
                values.append(diff[d_row * size + touch_rows])

    total = size * n_components
    raw = sparse.coo_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(total, total)
    ).tocsr()
    scale = float(np.max(np.abs(raw.data))) if raw.nnz else 0.0
    skew = (raw - raw.T).tocsr()
    asymmetry = float(np.max(np.abs(skew.data))) / scale if scale > 0 and skew.nnz else 0.0
    logger.debug(
        f"FD Hessian: {int(colors.max()) + 1} colours, {2 * n_components * (int(colors.max()) + 1)} "
        f"residual evaluations, relative asymmetry {asymmetry:.2e}."
    )
    return ((raw + raw.T) * 0.5).tocsr(), asymmetry


def lagrangian_hessian(
    measured: MeasuredComplex,
    state: KKTState,
    step: float | None = None,
) -> tuple[sparse.csr_matrix, float]:
    """Hessian of the Lagrangian in vec(g) at fixed multipliers."""
    images = state.g.images
    n_rows, n_components = images.shape
    pattern = assembler_for(measured.complex).pattern

    def residual(x: np.ndarray) -> np.ndarray:
        return vec(stationarity(measured, unvec(x, n_rows), state.lam, state.s))

    return fd_hessian(residual, vec(images), pattern, n_components, step)
