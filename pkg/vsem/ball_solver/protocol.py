"""Ellipsoid exactness protocol.

For the ellipsoid with semi-axes a, the map f*(v) = v / a is volume
preserving onto the ball. The boundary is given the measure mu'(tau) =
|f*(tau)|, under which f* restricted to the boundary is exactly
mass-preserving as well, and C' = sum mu'. Solvers are started from f* plus
a small seeded perturbation.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from vsem.complexcore.generate import gen_ellipsoid_mesh
from vsem.complexcore.simplicial import (
    MeasuredComplex,
    PiecewiseAffineMap,
    SimplicialComplex,
    simplex_volumes,
)
from vsem.complexcore.topology import BoundaryExtraction, boundary_complex
from vsem.sphere_init.stereo import renormalize

logger = logging.getLogger(__name__)

DEFAULT_PERTURBATION = 1e-4


@dataclass(frozen=True, eq=False)
class EllipsoidProtocol:
    complex: SimplicialComplex
    axes: np.ndarray
    perturbation: float = DEFAULT_PERTURBATION
    seed: int = 0

    def __post_init__(self):
        axes = np.asarray(self.axes, dtype=np.float64).reshape(-1)
        if axes.size != self.complex.ambient_dim or not np.all(axes > 0):
            raise ValueError(f"axes must be {self.complex.ambient_dim} positive numbers, got {axes.tolist()}")
        if self.perturbation < 0:
            raise ValueError("perturbation must be non-negative")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def generate(cls, axes, resolution: int, perturbation: float = DEFAULT_PERTURBATION, seed: int = 0) -> "EllipsoidProtocol":
        return cls(gen_ellipsoid_mesh(axes, resolution), axes, perturbation, seed)

    @cached_property
    def measured(self) -> MeasuredComplex:
        return MeasuredComplex(self.complex)

    @cached_property
    def extraction(self) -> BoundaryExtraction:
        return boundary_complex(self.complex)

    @cached_property
    def exact_map(self) -> PiecewiseAffineMap:
        return PiecewiseAffineMap(self.complex.vertices / self.axes)

    @property
    def exact_boundary_map(self) -> PiecewiseAffineMap:
        return PiecewiseAffineMap(self.exact_map.images[self.extraction.boundary_idx])

    @cached_property
    def boundary_masses(self) -> np.ndarray:
        """mu'(tau) = |f*(tau)|."""
        return simplex_volumes(self.exact_boundary_map.images, self.extraction.complex.simplices)

    @cached_property
    def measured_boundary(self) -> MeasuredComplex:
        return MeasuredComplex.from_masses(self.extraction.complex, self.boundary_masses)

    @property
    def target_volume(self) -> float:
        """C' = sum |f*(tau)|."""
        return float(self.boundary_masses.sum())

    def _noise(self, shape: tuple[int, ...], stream: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed, stream])
        return rng.uniform(-self.perturbation, self.perturbation, size=shape)

    def perturbed_boundary_map(self) -> PiecewiseAffineMap:
        images = self.exact_boundary_map.images
        noisy, _ = renormalize(images + self._noise(images.shape, 0))
        return PiecewiseAffineMap(noisy)

    def perturbed_interior_map(self, boundary_images: np.ndarray | None = None) -> PiecewiseAffineMap:
        """f* plus noise on interior vertices; boundary rows from ``boundary_images`` when given."""
        images = np.array(self.exact_map.images)
        interior = self.extraction.interior_idx
        images[interior] += self._noise((interior.size, images.shape[1]), 1)
        if boundary_images is not None:
            images[self.extraction.boundary_idx] = boundary_images
        return PiecewiseAffineMap(images)
