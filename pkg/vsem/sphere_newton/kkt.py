"""Lagrangian of the constrained sphere problem and its KKT residuals.

    L(g, lam, s) = E_V(g) + lam (|g(M)| - C') + 1/2 sum_i s_i (|g_i|^2 - 1)

Map unknowns are vectorized column-major: vec(g)[d * N + i] = g[i, d].
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from vsem.complexcore.simplicial import MeasuredComplex, PiecewiseAffineMap
from vsem.energy.laplacian import assemble_both

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class KKTState:
    g: PiecewiseAffineMap
    lam: float
    s: np.ndarray
    target: float

    def __post_init__(self):
        s = np.array(self.s, dtype=np.float64).reshape(-1)
        if s.size != self.g.n_vertices:
            raise ValueError(f"{s.size} sphere multipliers for {self.g.n_vertices} vertices")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "target", float(self.target))

    def moved(self, dg: np.ndarray, dlam: float, ds: np.ndarray, alpha: float) -> "KKTState":
        return replace(
            self,
            g=PiecewiseAffineMap(self.g.images + alpha * dg),
            lam=self.lam + alpha * dlam,
            s=self.s + alpha * ds,
        )


@dataclass(frozen=True, eq=False)
class KKTResidual:
    stationarity: np.ndarray
    volume: float
    sphere: np.ndarray
    energy_gradient: np.ndarray
    volume_gradient: np.ndarray
    image_volume: float

    @property
    def merit(self) -> float:
        """2-norm of the stacked residual blocks."""
        return float(
            np.sqrt(
                np.sum(self.stationarity**2) + self.volume**2 + np.sum(self.sphere**2)
            )
        )

    @property
    def max_norm(self) -> float:
        return float(
            max(np.max(np.abs(self.stationarity)), abs(self.volume), np.max(np.abs(self.sphere)))
        )

    def stacked(self) -> np.ndarray:
        return np.concatenate([vec(self.stationarity), [self.volume], self.sphere])


def vec(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray, n_rows: int) -> np.ndarray:
    return np.asarray(vector).reshape(n_rows, -1, order="F")


def gradients(measured: MeasuredComplex, images: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """(2 L_V(g) g, L_D(g) g, |g(M)|) from one weight computation."""
    l_v, l_d, volumes = assemble_both(measured, PiecewiseAffineMap(images))
    return 2.0 * (l_v.matrix @ images), l_d.matrix @ images, float(volumes.sum())


def stationarity(measured: MeasuredComplex, images: np.ndarray, lam: float, s: np.ndarray) -> np.ndarray:
    energy_gradient, volume_gradient, _ = gradients(measured, images)
    return energy_gradient + lam * volume_gradient + s[:, None] * images


def kkt_residual(measured: MeasuredComplex, state: KKTState) -> KKTResidual:
    """Stationarity 2 L_V g + lam L_D(g) g + diag(s) g, volume |g(M)| - C', sphere (|g_i|^2 - 1) / 2."""
    images = state.g.images
    energy_gradient, volume_gradient, image_volume = gradients(measured, images)
    return KKTResidual(
        stationarity=energy_gradient + state.lam * volume_gradient + state.s[:, None] * images,
        volume=image_volume - state.target,
        sphere=0.5 * (np.sum(images * images, axis=1) - 1.0),
        energy_gradient=energy_gradient,
        volume_gradient=volume_gradient,
        image_volume=image_volume,
    )


def least_squares_multipliers(measured: MeasuredComplex, g: PiecewiseAffineMap) -> tuple[float, np.ndarray]:
    """Multipliers minimizing the stationarity residual at a fixed map.

    For fixed lam, s_i = -g_i.(G_i + lam A_i) / |g_i|^2 removes the radial
    part; lam then fits the tangential parts of G = 2 L_V g and A = L_D(g) g.
    """
    images = g.images
    energy_gradient, volume_gradient, _ = gradients(measured, images)
    squared = np.sum(images * images, axis=1)

    def tangential(field: np.ndarray) -> np.ndarray:
        radial = np.sum(field * images, axis=1) / squared
        return field - radial[:, None] * images

    tangent_g = tangential(energy_gradient)
    tangent_a = tangential(volume_gradient)
    denominator = float(np.sum(tangent_a * tangent_a))
    if denominator > 1e-30 * max(float(np.sum(tangent_g * tangent_g)), 1.0):
        lam = -float(np.sum(tangent_g * tangent_a)) / denominator
    else:
        lam = 0.0
    s = -np.sum((energy_gradient + lam * volume_gradient) * images, axis=1) / squared
    logger.debug(f"Least-squares multipliers: lambda = {lam:.6e}, |s|_inf = {np.max(np.abs(s)):.3e}.")
    return lam, s
