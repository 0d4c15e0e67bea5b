"""North-south alternating stretch-energy iteration on S^(n-1).

Each pass inverts the stereographic plane (which swaps the poles), keeps
the far vertices fixed and re-solves the near ones against L_V(g).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from vsem.complexcore.simplicial import MeasuredComplex, PiecewiseAffineMap, check_image_volumes, simplex_volumes
from vsem.energy.laplacian import assemble_vs_laplacian
from vsem.energy.stretch import vs_energy
from vsem.errors import CollapsedSimplexError, ConfigError, EmptyInteriorError
from vsem.linsolve import solve_pinned
from vsem.report import SolverReport
from vsem.sphere_init.stereo import StereoPoints, project_with_infinity

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SemConfig:
    radius: float = 1.2
    tol: float = 1e-8
    max_iterations: int = 50

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError(f"interior radius must be positive, got {self.radius}")
        if not self.tol > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tol}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be at least 1, got {self.max_iterations}")


def _interior_split(laplacian: sparse.csr_matrix, plane: StereoPoints, radius: float) -> np.ndarray:
    """I = {|h_i| < r * median |h|}, minus neighbours of infinite vertices.

    The median runs over the finite points, so r is scale free.
    """
    norms = plane.norms()
    finite = np.isfinite(norms)
    scale = float(np.median(norms[finite])) if np.any(finite) else 0.0
    interior = norms < radius * scale
    if np.any(plane.infinite):
        touching = laplacian[:, np.flatnonzero(plane.infinite)].getnnz(axis=1) > 0
        interior &= ~touching
    return interior


def _in_frame(images: np.ndarray, mirrored: bool) -> np.ndarray:
    if not mirrored:
        return images
    out = images.copy()
    out[:, -1] = -out[:, -1]
    return out


def sem_iterate(
    measured: MeasuredComplex,
    initial: PiecewiseAffineMap,
    config: SemConfig | None = None,
) -> tuple[PiecewiseAffineMap, SolverReport]:
    """Reduce E_V on the sphere; stops once an iteration improves E_V by at most ``tol``.

    An iteration that increases the energy is not taken and ends the run. If
    that happens before any iteration was accepted the run is reported as
    stalled. A ``tol`` at least E_V skips the iterations.
    """
    config = config or SemConfig()
    report = SolverReport(stage="sem")
    report.details.update({"radius": config.radius, "tol": config.tol})
    complex = measured.complex
    initial.check_domain(complex)

    images = np.array(initial.images)
    plane = project_with_infinity(images)
    mirrored = False
    energy = vs_energy(measured, initial)
    report.energy_trace.append(energy)
    if not math.isfinite(config.tol) or config.tol >= energy:
        logger.info(f"SEM skipped: tol {config.tol:.3e} is not below E_V = {energy:.6e}.")
        report.converged = True
        return initial, report
    delta = np.inf
    logger.info(f"SEM start: E_V = {energy:.12e}, {int(plane.infinite.sum())} vertices at infinity.")

    while delta > config.tol and report.iterations < config.max_iterations:
        laplacian = assemble_vs_laplacian(measured, PiecewiseAffineMap(images)).matrix
        inverted = plane.inverted()
        interior = _interior_split(laplacian, inverted, config.radius)
        if not np.any(interior):
            raise EmptyInteriorError(
                f"no vertex inside {config.radius} times the median plane radius; increase the interior radius"
            )
        fixed = np.flatnonzero(~interior)
        solved = solve_pinned(
            laplacian,
            np.zeros_like(inverted.coords),
            fixed,
            inverted.coords[fixed],
        )
        candidate = inverted.with_coords(np.flatnonzero(interior), solved[interior])
        candidate_images = candidate.unproject()
        try:
            check_image_volumes(simplex_volumes(candidate_images, complex.simplices))
            new_energy = vs_energy(measured, PiecewiseAffineMap(candidate_images))
        except CollapsedSimplexError as exc:
            new_energy = np.inf
            logger.info(f"SEM iteration {report.iterations + 1} collapsed a simplex ({exc}).")
        delta = energy - new_energy
        if delta < 0:
            if report.iterations == 0 and -delta > config.tol:
                report.stalled = True
                report.warn(f"first iteration raised E_V by {-delta:.3e}; keeping the initial map")
            else:
                report.details["stopped_on_increase"] = True
                logger.info(
                    f"SEM iteration {report.iterations + 1} raised E_V by {-delta:.3e}; keeping the previous map."
                )
            break
        plane, images, energy = candidate, candidate_images, new_energy
        mirrored = not mirrored
        report.iterations += 1
        report.energy_trace.append(energy)
        report.delta_energy_trace.append(delta)
        logger.info(
            f"SEM iteration {report.iterations}: E_V = {energy:.12e}, dE = {delta:.3e}, "
            f"|I| = {int(interior.sum())}."
        )

    report.converged = not report.stalled and delta <= config.tol
    if not report.converged and not report.stalled:
        logger.info(f"SEM stopped after {config.max_iterations} iterations with dE = {delta:.3e}.")
    return PiecewiseAffineMap(_in_frame(images, mirrored)), report
