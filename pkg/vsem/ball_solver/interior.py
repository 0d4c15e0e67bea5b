"""Interior subproblem: boundary images fixed on the sphere, interior solved by fixed-point iteration."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from vsem.complexcore.simplicial import MeasuredComplex, PiecewiseAffineMap, SimplicialComplex, simplex_volumes
from vsem.energy.laplacian import assemble_dirichlet_laplacian, assemble_vs_laplacian
from vsem.energy.stretch import vs_energy
from vsem.errors import ConfigError
from vsem.linsolve import solve_pinned
from vsem.report import SolverReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InteriorConfig:
    tol: float = 1e-13
    max_iterations: int = 200

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError(f"interior tolerance must be positive, got {self.tol}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be at least 1, got {self.max_iterations}")


def harmonic_interior(
    complex: SimplicialComplex,
    boundary_idx: np.ndarray,
    boundary_images: np.ndarray,
) -> PiecewiseAffineMap:
    """Solve [L_D]_II f_I = -[L_D]_IB f_B."""
    laplacian = assemble_dirichlet_laplacian(complex)
    boundary_images = np.asarray(boundary_images, dtype=np.float64)
    rhs = np.zeros((complex.n_vertices, boundary_images.shape[1]))
    images = solve_pinned(laplacian, rhs, boundary_idx, boundary_images)
    return PiecewiseAffineMap(images)


def interior_gradient_norm(measured: MeasuredComplex, fmap: PiecewiseAffineMap, interior_idx: np.ndarray) -> float:
    """max |[L_V(f) f]_I|."""
    if not len(interior_idx):
        return 0.0
    laplacian = assemble_vs_laplacian(measured, fmap)
    return float(np.max(np.abs((laplacian.matrix @ fmap.images)[interior_idx])))


def fixed_point_interior(
    measured: MeasuredComplex,
    initial: PiecewiseAffineMap,
    boundary_idx: np.ndarray,
    config: InteriorConfig | None = None,
) -> tuple[PiecewiseAffineMap, SolverReport]:
    """Iterate f_I <- solve([L_V(f)]_II, -[L_V(f)]_IB f_B) until the relative energy drop is below tol.

    An iteration that raises E_V beyond round-off is rejected and the report
    is flagged as stalled.
    """
    config = config or InteriorConfig()
    report = SolverReport(stage="fixed_point")
    complex = measured.complex
    initial.check_domain(complex)
    boundary_idx = np.asarray(boundary_idx, dtype=np.int64)
    interior_idx = np.setdiff1d(np.arange(complex.n_vertices), boundary_idx)

    images = np.array(initial.images)
    energy = vs_energy(measured, initial)
    tol_grad = config.tol * energy
    report.energy_trace.append(energy)
    volume_trace = [float(simplex_volumes(images, complex.simplices).sum())]
    logger.info(f"Fixed-point start: E_V = {energy:.12e}, {interior_idx.size} interior vertices.")

    # The relative drop of one iteration is at most 1.
    skip = not math.isfinite(config.tol) or config.tol >= 1.0
    if skip:
        logger.info(f"Fixed point skipped: relative tol {config.tol:.3e} is at least 1.")
        report.converged = True

    while not skip and report.iterations < config.max_iterations:
        laplacian = assemble_vs_laplacian(measured, PiecewiseAffineMap(images))
        candidate = solve_pinned(laplacian, np.zeros_like(images), boundary_idx, images[boundary_idx])
        new_energy = vs_energy(measured, PiecewiseAffineMap(candidate))
        delta = energy - new_energy
        threshold = config.tol * abs(energy)
        if delta < 0:
            if -delta > threshold:
                report.stalled = True
                report.warn(
                    f"energy increased by {-delta:.3e} at iteration {report.iterations + 1}; keeping the previous map"
                )
            else:
                report.converged = True
            break
        images, energy = candidate, new_energy
        report.iterations += 1
        report.energy_trace.append(energy)
        report.delta_energy_trace.append(delta)
        volume_trace.append(float(simplex_volumes(images, complex.simplices).sum()))
        logger.info(f"Fixed-point iteration {report.iterations}: E_V = {energy:.12e}, dE = {delta:.3e}.")
        if delta <= threshold:
            report.converged = True
            break
    if not report.converged and not report.stalled:
        report.warn(f"no convergence after {config.max_iterations} iterations")

    result = PiecewiseAffineMap(images)
    gradient = interior_gradient_norm(measured, result, interior_idx)
    report.details.update(
        {
            "tol": config.tol,
            "tol_grad": tol_grad,
            "interior_gradient": gradient,
            "image_volume_trace": volume_trace,
        }
    )
    if report.converged and gradient > tol_grad:
        logger.info(f"Interior gradient {gradient:.3e} above tol_grad {tol_grad:.3e} at the energy stop.")
    return result, report
