"""Dirichlet and volumetric stretch energies, their gradients and the epsilon/delta diagnostics."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from vsem.complexcore.simplicial import (
    MeasuredComplex,
    PiecewiseAffineMap,
    SimplicialComplex,
    check_image_volumes,
    simplex_volumes,
)
from vsem.energy.laplacian import (
    assemble_image_dirichlet_laplacian,
    assemble_vs_laplacian,
    assemble_dirichlet_laplacian,
    cotangent_weights,
)
from vsem.errors import CollapsedSimplexError, MeshValidationError

logger = logging.getLogger(__name__)


def unit_ball_volume(n: int) -> float:
    """|B^n| = pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def unit_sphere_area(n: int) -> float:
    """(n-1)-volume of the unit sphere S^(n-1) in R^n."""
    return n * unit_ball_volume(n)


def _trace_form(matrix, images: np.ndarray) -> float:
    return float(np.sum(images * (matrix @ images)))


def dirichlet_energy(complex: SimplicialComplex, fmap: PiecewiseAffineMap) -> float:
    """(1/k) trace(f^T L_D f); equals |M| for the identity map."""
    fmap.check_domain(complex)
    laplacian = assemble_dirichlet_laplacian(complex)
    return _trace_form(laplacian.matrix, fmap.images) / complex.top_dim


def stretch_factor(measured: MeasuredComplex, fmap: PiecewiseAffineMap, simplex_id: int) -> float:
    complex = measured.complex
    fmap.check_domain(complex)
    image = simplex_volumes(fmap.images, complex.simplices[[simplex_id]])
    reference = float(np.mean(simplex_volumes(fmap.images, complex.simplices)))
    try:
        check_image_volumes(image, reference)
    except CollapsedSimplexError:
        raise CollapsedSimplexError(simplex_id)
    return float(measured.masses[simplex_id] / image[0])


def stretch_factors(measured: MeasuredComplex, fmap: PiecewiseAffineMap) -> np.ndarray:
    volumes = simplex_volumes(fmap.images, measured.complex.simplices)
    check_image_volumes(volumes)
    return measured.masses / volumes


def vs_energy(measured: MeasuredComplex, fmap: PiecewiseAffineMap) -> float:
    """E_V(f) = sum |f(sigma)|^2 / mu(sigma)."""
    fmap.check_domain(measured.complex)
    masses = measured.masses
    if np.any(masses <= 0):
        raise MeshValidationError("zero-mass simplex")
    volumes = simplex_volumes(fmap.images, measured.complex.simplices)
    return float(np.sum(volumes**2 / masses))


def vs_energy_trace(measured: MeasuredComplex, fmap: PiecewiseAffineMap) -> float:
    """The quadratic-form evaluation (1/k) trace(f^T L_V(f) f)."""
    laplacian = assemble_vs_laplacian(measured, fmap)
    return _trace_form(laplacian.matrix, fmap.images) / measured.complex.top_dim


def image_volume_trace(complex: SimplicialComplex, fmap: PiecewiseAffineMap) -> float:
    """(1/k) trace(f^T L_D(f) f), which equals |f(M)|."""
    laplacian = assemble_image_dirichlet_laplacian(complex, fmap)
    return _trace_form(laplacian.matrix, fmap.images) / complex.top_dim


def vs_gradient(measured: MeasuredComplex, fmap: PiecewiseAffineMap) -> np.ndarray:
    """grad E_V(f) = 2 L_V(f) f."""
    laplacian = assemble_vs_laplacian(measured, fmap)
    return 2.0 * (laplacian.matrix @ fmap.images)


def image_volume_gradient(complex: SimplicialComplex, fmap: PiecewiseAffineMap) -> np.ndarray:
    """grad |f(M)| = L_D(f) f."""
    laplacian = assemble_image_dirichlet_laplacian(complex, fmap)
    return laplacian.matrix @ fmap.images


def negative_weight_fraction(complex: SimplicialComplex, fmap: PiecewiseAffineMap) -> float | None:
    """Share of per-simplex image cotangent weights that are negative (obtuse dihedrals)."""
    try:
        weights, _ = cotangent_weights(fmap.images, complex.simplices)
    except CollapsedSimplexError:
        return None
    return float(np.mean(weights < 0)) if weights.size else 0.0


@dataclass(frozen=True, eq=False)
class StretchDiagnostics:
    energy: float
    lower_bound: float
    epsilon: float
    delta: np.ndarray
    mean_delta: float
    sd_delta: float
    image_volume_total: float
    total_mass: float
    mu_min: float
    mu_max: float
    image_volumes: np.ndarray
    masses: np.ndarray
    negative_weight_fraction: float | None = None

    @property
    def sandwich_bounds(self) -> tuple[float, float]:
        """mu_min (C/sum mu)^2 |delta|^2 and mu_max (C/sum mu)^2 |delta|^2."""
        scale = (self.image_volume_total / self.total_mass) ** 2 * float(self.delta @ self.delta)
        return self.mu_min * scale, self.mu_max * scale

    def sandwich_holds(self, rtol: float = 1e-9) -> bool:
        low, high = self.sandwich_bounds
        slack = rtol * max(abs(self.energy), np.finfo(float).tiny)
        return low - slack <= self.epsilon <= high + slack

    @property
    def flipped_ratio_count(self) -> int:
        return int(np.sum(self.delta <= -1.0))

    def summary(self) -> dict:
        out = {
            "energy": self.energy,
            "lower_bound": self.lower_bound,
            "epsilon": self.epsilon,
            "mean_delta": self.mean_delta,
            "sd_delta": self.sd_delta,
        }
        if self.negative_weight_fraction is not None:
            out["negative_weight_fraction"] = self.negative_weight_fraction
        return out


def diagnostics_from_volumes(
    image_volumes: np.ndarray,
    masses: np.ndarray,
    C: float | None = None,
    negative_fraction: float | None = None,
) -> StretchDiagnostics:
    image_volumes = np.asarray(image_volumes, dtype=np.float64)
    masses = np.asarray(masses, dtype=np.float64)
    if np.any(masses <= 0):
        raise MeshValidationError("zero-mass simplex")
    total_image = float(image_volumes.sum())
    C = total_image if C is None else float(C)
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    total_mass = float(masses.sum())
    energy = float(np.sum(image_volumes**2 / masses))
    lower = C * C / total_mass
    if total_image > 0:
        delta = (image_volumes / total_image) / (masses / total_mass) - 1.0
    else:
        delta = np.full_like(masses, -1.0)
    return StretchDiagnostics(
        energy=energy,
        lower_bound=lower,
        epsilon=energy - lower,
        delta=delta,
        mean_delta=float(delta.mean()) if delta.size else 0.0,
        sd_delta=float(delta.std()) if delta.size else 0.0,
        image_volume_total=total_image,
        total_mass=total_mass,
        mu_min=float(masses.min()),
        mu_max=float(masses.max()),
        image_volumes=image_volumes,
        masses=masses,
        negative_weight_fraction=negative_fraction,
    )


def diagnostics(
    measured: MeasuredComplex,
    fmap: PiecewiseAffineMap,
    C: float | None = None,
    with_weights: bool = True,
) -> StretchDiagnostics:
    """epsilon = E_V - C^2 / sum(mu) and the per-simplex volume-ratio errors delta.

    ``C`` defaults to the total image volume, the value for which the
    epsilon/delta sandwich is exact.
    """
    complex = measured.complex
    fmap.check_domain(complex)
    volumes = simplex_volumes(fmap.images, complex.simplices)
    fraction = negative_weight_fraction(complex, fmap) if with_weights else None
    return diagnostics_from_volumes(volumes, measured.masses, C, fraction)


def normalized_diagnostics(
    measured: MeasuredComplex,
    fmap: PiecewiseAffineMap,
    target: float | None = None,
    with_weights: bool = True,
) -> StretchDiagnostics:
    """Diagnostics after rescaling image volumes and masses to the same total.

    The default target is |B^n| for solid n-complexes and |S^(n-1)| for
    boundary (n-1)-complexes in R^n, so values compare across meshes.
    """
    complex = measured.complex
    fmap.check_domain(complex)
    n = fmap.images.shape[1]
    if target is None:
        target = unit_ball_volume(n) if complex.top_dim == n else unit_sphere_area(n)
    volumes = simplex_volumes(fmap.images, complex.simplices)
    total = float(volumes.sum())
    if not total > 0:
        raise CollapsedSimplexError(0, "image has zero total volume")
    scaled_volumes = volumes * (target / total)
    scaled_masses = measured.masses * (target / measured.total_mass)
    fraction = negative_weight_fraction(complex, fmap) if with_weights else None
    return diagnostics_from_volumes(scaled_volumes, scaled_masses, target, fraction)
