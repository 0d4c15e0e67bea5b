"""Local untangling of inverted image simplices.

Gauss-Seidel style: each corner of an inverted simplex is pulled towards the
average of its neighbours and the move is kept only when the simplices around
it end up with fewer inversions (or as many, but a larger minimum volume).
Vertices constrained to the unit sphere move towards the normalized average of
their on-sphere neighbours and are projected back after every move.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import sparse

logger = logging.getLogger(__name__)

STEP_FRACTIONS = (1.0, 0.5, 0.25)

VolumeFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class UntangleResult:
    images: np.ndarray
    initial_flips: int
    remaining_flips: int
    sweeps: int
    moved: np.ndarray


def vertex_incidence(simplices: np.ndarray, n_vertices: int) -> sparse.csr_matrix:
    """Vertex -> top simplex incidence, shape (N, m)."""
    m, width = simplices.shape
    rows = simplices.reshape(-1)
    cols = np.repeat(np.arange(m), width)
    return sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n_vertices, m))


def _target(images: np.ndarray, neighbours: np.ndarray, on_sphere: np.ndarray, vertex: int) -> np.ndarray | None:
    if not on_sphere[vertex]:
        return images[neighbours].mean(axis=0) if neighbours.size else None
    anchors = neighbours[on_sphere[neighbours]]
    if not anchors.size:
        return None
    mean = images[anchors].mean(axis=0)
    norm = float(np.linalg.norm(mean))
    return mean / norm if norm > 0 else None


def untangle(
    simplices: np.ndarray,
    images: np.ndarray,
    volumes: VolumeFunction,
    adjacency: sparse.csr_matrix,
    movable: np.ndarray,
    on_sphere: np.ndarray | None = None,
    max_sweeps: int = 10,
) -> UntangleResult:
    """Repair inverted simplices by local vertex moves; the inversion count never rises.

    ``volumes(points, simplices)`` returns signed volumes, non-positive meaning
    inverted. Free vertices are tried before on-sphere ones, each group in
    order of decreasing distance to its target.
    """
    images = np.array(images, dtype=np.float64)
    n_vertices = len(images)
    movable = np.asarray(movable, dtype=bool)
    on_sphere = np.zeros(n_vertices, dtype=bool) if on_sphere is None else np.asarray(on_sphere, dtype=bool)
    incidence = vertex_incidence(simplices, n_vertices)
    adjacency = sparse.csr_matrix(adjacency)

    signed = volumes(images, simplices)
    initial = int(np.sum(signed <= 0))
    moved = np.zeros(n_vertices, dtype=bool)
    sweeps = 0
    while sweeps < max_sweeps and np.any(signed <= 0):
        corners = np.unique(simplices[signed <= 0])
        corners = corners[movable[corners]]
        targets: set[int] = set()
        deviation = np.full(corners.size, -1.0)
        for i, v in enumerate(corners):
            neighbours = adjacency.indices[adjacency.indptr[v] : adjacency.indptr[v + 1]]
            target = _target(images, neighbours, on_sphere, int(v))
            if target is not None:
                targets.add(int(v))
                deviation[i] = float(np.linalg.norm(images[v] - target))
        order = corners[np.lexsort((corners, -deviation, on_sphere[corners]))]

        changed = 0
        for v in order.tolist():
            local = incidence.indices[incidence.indptr[v] : incidence.indptr[v + 1]]
            before = signed[local]
            if not np.any(before <= 0):
                continue
            neighbours = adjacency.indices[adjacency.indptr[v] : adjacency.indptr[v + 1]]
            # Neighbours may have moved earlier in this sweep.
            target = _target(images, neighbours, on_sphere, v) if v in targets else None
            if target is None:
                continue
            start = images[v].copy()
            accepted = False
            for fraction in STEP_FRACTIONS:
                trial = start + fraction * (target - start)
                if on_sphere[v]:
                    norm = float(np.linalg.norm(trial))
                    if norm == 0:
                        continue
                    trial = trial / norm
                images[v] = trial
                after = volumes(images, simplices[local])
                flips_before, flips_after = int(np.sum(before <= 0)), int(np.sum(after <= 0))
                if flips_after < flips_before or (flips_after == flips_before and after.min() > before.min()):
                    signed[local] = after
                    accepted = True
                    break
            if not accepted:
                images[v] = start
                continue
            moved[v] = True
            changed += 1

        if not changed:
            break
        sweeps += 1
        logger.debug(f"Untangle sweep {sweeps}: moved {changed} vertices, {int(np.sum(signed <= 0))} flips left.")

    return UntangleResult(images, initial, int(np.sum(signed <= 0)), sweeps, np.flatnonzero(moved))
