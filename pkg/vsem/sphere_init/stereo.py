"""Stereographic projection between S^(n-1) and the extended plane R^(n-1).

The projection pole is the north pole e_n. Its image, the point at infinity,
is carried symbolically by ``StereoPoints.infinite`` and never stored as a
float.
"""

from dataclasses import dataclass

import numpy as np

from vsem.errors import PoleError

# Points with 1 - x_n below this are treated as the pole.
POLE_TOLERANCE = 1e-14


def stereo_project(points: np.ndarray) -> np.ndarray:
    """Pi(x)_s = x_s / (1 - x_n), s = 1..n-1."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    denominator = 1.0 - points[:, -1]
    poles = np.flatnonzero(denominator <= POLE_TOLERANCE)
    if poles.size:
        raise PoleError(f"point {int(poles[0])} is the projection pole")
    return points[:, :-1] / denominator[:, None]


def stereo_unproject(plane: np.ndarray) -> np.ndarray:
    """Pi^-1(h) = (2h, |h|^2 - 1) / (|h|^2 + 1)."""
    plane = np.atleast_2d(np.asarray(plane, dtype=np.float64))
    squared = np.sum(plane * plane, axis=1)
    return np.column_stack([2.0 * plane, squared - 1.0]) / (squared + 1.0)[:, None]


@dataclass(frozen=True, eq=False)
class StereoPoints:
    """Plane coordinates h (N x (n-1)) plus a mask of vertices sitting at infinity."""

    coords: np.ndarray
    infinite: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64)
        infinite = np.array(self.infinite, dtype=bool).reshape(-1)
        if coords.ndim != 2 or infinite.shape != (coords.shape[0],):
            raise ValueError("coords must be N x (n-1) with one infinity flag per row")
        coords[infinite] = 0.0
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "infinite", infinite)

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    def norms(self) -> np.ndarray:
        """|h_i|, with +inf on the symbolic points."""
        out = np.linalg.norm(self.coords, axis=1)
        out[self.infinite] = np.inf
        return out

    def inverted(self) -> "StereoPoints":
        """h -> h / |h|^2; the origin and infinity swap."""
        squared = np.sum(self.coords * self.coords, axis=1)
        zero = (squared == 0.0) & ~self.infinite
        coords = np.zeros_like(self.coords)
        regular = ~zero & ~self.infinite
        coords[regular] = self.coords[regular] / squared[regular, None]
        return StereoPoints(coords, zero)

    def unproject(self) -> np.ndarray:
        points = stereo_unproject(self.coords)
        points[self.infinite] = 0.0
        points[self.infinite, -1] = 1.0
        return points

    def with_coords(self, rows: np.ndarray, values: np.ndarray) -> "StereoPoints":
        coords = self.coords.copy()
        infinite = self.infinite.copy()
        coords[rows] = values
        infinite[rows] = False
        return StereoPoints(coords, infinite)


def project_with_infinity(points: np.ndarray) -> StereoPoints:
    """Like ``stereo_project`` but sends pole vertices to symbolic infinity."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    denominator = 1.0 - points[:, -1]
    infinite = denominator <= POLE_TOLERANCE
    safe = np.where(infinite, 1.0, denominator)
    coords = points[:, :-1] / safe[:, None]
    return StereoPoints(coords, infinite)


def renormalize(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Radially project rows onto the unit sphere; returns the largest |1 - |x_i||."""
    norms = np.linalg.norm(points, axis=1)
    if np.any(norms == 0):
        raise ValueError("cannot renormalize a zero row onto the sphere")
    return points / norms[:, None], float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
