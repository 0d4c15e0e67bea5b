import logging
from dataclasses import dataclass

import numpy as np

from vsem.errors import RankDeficientBoundaryError

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class PcaTransform:
    """U = (V - center) X diag(lambdas)^(-1/2); ``lambdas`` are squared singular values."""

    center: np.ndarray
    axes: np.ndarray
    lambdas: np.ndarray

    def apply(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points) - self.center) @ self.axes / np.sqrt(self.lambdas)

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "axes": self.axes.tolist(),
            "lambdas": self.lambdas.tolist(),
        }


def pca_normalize_boundary(vertices: np.ndarray) -> tuple[np.ndarray, PcaTransform]:
    """Stretch boundary vertices along their principal axes into a ball-like cloud.

    The output is the left singular factor of the centred vertex matrix, so
    its columns are orthonormal. The axes are chosen with det(X) > 0 so the
    transform keeps orientation.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    m, n = vertices.shape
    if m <= n:
        raise RankDeficientBoundaryError(f"need more than {n} boundary vertices, got {m}")
    center = vertices.mean(axis=0)
    centred = vertices - center
    u, singular, wt = np.linalg.svd(centred, full_matrices=False)
    if singular[-1] <= RANK_TOLERANCE * singular[0]:
        raise RankDeficientBoundaryError(
            f"boundary is flat: singular values {np.array2string(singular, precision=3)}"
        )
    axes = wt.T
    if np.linalg.det(axes) < 0:
        axes[:, -1] = -axes[:, -1]
        u[:, -1] = -u[:, -1]
    logger.info(f"PCA boundary normalization: principal lengths {np.array2string(singular, precision=4)}.")
    return u, PcaTransform(center, axes, singular**2)
