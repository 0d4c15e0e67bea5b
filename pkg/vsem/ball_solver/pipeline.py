"""End-to-end sphere and ball parameterization pipelines.

Every stage runs inside ``_stage``, which logs its duration and re-raises
failures as ``PipelineStageError`` tagged with the stage name.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass

import numpy as np

from vsem.ball_solver.interior import InteriorConfig, fixed_point_interior, harmonic_interior
from vsem.ball_solver.orientation import fix_orientation
from vsem.ball_solver.pca import pca_normalize_boundary
from vsem.complexcore.simplicial import MeasuredComplex, PiecewiseAffineMap, SimplicialComplex
from vsem.complexcore.topology import check_ball_topology, check_sphere_topology
from vsem.config import get_settings
from vsem.energy.stretch import diagnostics, normalized_diagnostics
from vsem.errors import ConfigError, PipelineStageError
from vsem.report import PipelineReport, SolverReport
from vsem.sphere_init.dirac import dirac_map, orientation_signs
from vsem.sphere_init.sem import SemConfig, sem_iterate
from vsem.sphere_init.stereo import renormalize
from vsem.sphere_newton.solver import SphereSolverConfig, solve_sphere

logger = logging.getLogger(__name__)

SPHERE_INITS = ("sem", "dirac")


@dataclass(frozen=True)
class BallPipelineConfig:
    tol_boundary: float = 1e-12
    tol_kkt: float = 1e-9
    tol_interior: float = 1e-13
    radius: float = 1.2
    sem_tol: float = 1e-8
    sphere_init: str = "sem"
    max_sem_iterations: int = 50
    max_newton_iterations: int = 30
    max_interior_iterations: int = 200
    pca: bool = True
    fix_orientation: bool = True
    max_orientation_sweeps: int = 10

    def __post_init__(self):
        for name in ("tol_boundary", "tol_kkt", "tol_interior", "radius", "sem_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("max_sem_iterations", "max_newton_iterations", "max_interior_iterations", "max_orientation_sweeps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.sphere_init not in SPHERE_INITS:
            raise ConfigError(f"sphere_init must be one of {SPHERE_INITS}, got {self.sphere_init!r}")

    def sem_config(self) -> SemConfig:
        """SEM never runs to a tighter tolerance than the boundary solve."""
        tol = max(self.sem_tol, self.tol_boundary)
        return SemConfig(radius=self.radius, tol=tol, max_iterations=self.max_sem_iterations)

    def sphere_config(self) -> SphereSolverConfig:
        return SphereSolverConfig(
            tol=self.tol_boundary, tol_kkt=self.tol_kkt, max_iterations=self.max_newton_iterations
        )

    def interior_config(self) -> InteriorConfig:
        return InteriorConfig(tol=self.tol_interior, max_iterations=self.max_interior_iterations)


@contextmanager
def _stage(name: str, timings: dict):
    start = time.perf_counter()
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as exc:
        logger.error(f"Stage '{name}' failed: {exc}", exc_info=True)
        raise PipelineStageError(name, exc) from exc
    finally:
        timings[name] = time.perf_counter() - start
        logger.info(f"Stage '{name}' took {timings[name]:.3f}s.")


def _diagnostics_block(measured: MeasuredComplex, fmap: PiecewiseAffineMap) -> dict:
    raw = diagnostics(measured, fmap)
    normalized = normalized_diagnostics(measured, fmap, with_weights=False)
    block = raw.summary()
    block["sandwich_holds"] = raw.sandwich_holds()
    block["normalized"] = normalized.summary()
    return block


def _solve_boundary(
    measured_boundary: MeasuredComplex,
    config: BallPipelineConfig,
    initial: PiecewiseAffineMap | None,
    target: float | None,
    report: PipelineReport,
    timings: dict,
) -> PiecewiseAffineMap:
    if initial is None:
        with _stage("dirac", timings):
            initial = dirac_map(measured_boundary.complex)
        if config.sphere_init == "sem":
            with _stage("sem", timings):
                initial, sem_report = sem_iterate(measured_boundary, initial, config.sem_config())
            report.add(sem_report)
    else:
        initial.check_domain(measured_boundary.complex)
        initial = PiecewiseAffineMap(renormalize(initial.images)[0])
    with _stage("sphere_newton", timings):
        sphere_map, sphere_report = solve_sphere(measured_boundary, initial, target, config.sphere_config())
    flipped = int(np.sum(orientation_signs(measured_boundary.complex, sphere_map.images) < 0))
    sphere_report.flip_counts.append(flipped)
    if flipped:
        sphere_report.warn(f"{flipped} boundary simplices are inverted on the sphere")
    report.add(sphere_report)
    return sphere_map


def _finish(report: PipelineReport, timings: dict) -> None:
    if get_settings().report_timings:
        report.details["timings"] = dict(timings)


def parameterize_sphere(
    measured_boundary: MeasuredComplex,
    config: BallPipelineConfig | None = None,
    initial: PiecewiseAffineMap | None = None,
    target: float | None = None,
) -> tuple[PiecewiseAffineMap, PipelineReport]:
    """Dirac map, SEM, then the constrained Newton solve on a closed (n-1)-complex."""
    config = config or BallPipelineConfig()
    report = PipelineReport(command="sphere", config=asdict(config))
    timings: dict = {}
    with _stage("topology", timings):
        check_sphere_topology(measured_boundary.complex)
    sphere_map = _solve_boundary(measured_boundary, config, initial, target, report, timings)
    with _stage("diagnostics", timings):
        report.diagnostics["sphere"] = _diagnostics_block(measured_boundary, sphere_map)
    _finish(report, timings)
    return sphere_map, report


def parameterize_ball(
    measured: MeasuredComplex,
    config: BallPipelineConfig | None = None,
    boundary_masses: np.ndarray | None = None,
    initial_boundary: PiecewiseAffineMap | None = None,
    target: float | None = None,
    initial_interior: PiecewiseAffineMap | None = None,
) -> tuple[PiecewiseAffineMap, PipelineReport]:
    """Map a measured n-ball complex onto the unit ball.

    The boundary measure defaults to |tau| on the (PCA-normalized) boundary.
    ``initial_interior`` replaces the harmonic initialization; its boundary
    rows are overwritten by the solved sphere map.
    """
    config = config or BallPipelineConfig()
    report = PipelineReport(command="ball", config=asdict(config))
    timings: dict = {}
    complex = measured.complex

    with _stage("topology", timings):
        extraction = check_ball_topology(complex)
    boundary_idx, interior_idx = extraction.boundary_idx, extraction.interior_idx
    report.details.update(
        {"boundary_vertices": int(boundary_idx.size), "interior_vertices": int(interior_idx.size)}
    )

    surface = extraction.complex
    if config.pca:
        with _stage("pca", timings):
            normalized, transform = pca_normalize_boundary(surface.vertices)
            surface = SimplicialComplex(normalized, surface.simplices)
        report.details["pca"] = transform.to_dict()

    with _stage("boundary_measure", timings):
        if boundary_masses is None:
            measured_boundary = MeasuredComplex(surface)
        else:
            measured_boundary = MeasuredComplex.from_masses(surface, boundary_masses)

    sphere_map = _solve_boundary(measured_boundary, config, initial_boundary, target, report, timings)

    with _stage("harmonic_interior", timings):
        if initial_interior is None:
            fmap = harmonic_interior(complex, boundary_idx, sphere_map.images)
        else:
            initial_interior.check_domain(complex)
            images = np.array(initial_interior.images)
            images[boundary_idx] = sphere_map.images
            fmap = PiecewiseAffineMap(images)

    with _stage("fixed_point", timings):
        fmap, interior_report = fixed_point_interior(measured, fmap, boundary_idx, config.interior_config())
    report.add(interior_report)

    if config.fix_orientation:
        with _stage("orientation", timings):
            fmap, fix = fix_orientation(measured, fmap, interior_idx, config.max_orientation_sweeps)
        orientation_report = SolverReport(stage="orientation", iterations=fix.sweeps)
        orientation_report.flip_counts.extend([fix.initial_flips, fix.remaining_flips])
        orientation_report.details.update(
            {"mirrored": fix.mirrored, "moved_vertices": fix.moved_vertices, "energy_change": fix.energy_change}
        )
        if fix.moved_vertices:
            orientation_report.delta_energy_trace.append(-fix.energy_change)
        orientation_report.converged = fix.remaining_flips == 0
        if fix.mirrored:
            orientation_report.warn("global orientation flip detected; map mirrored before repair")
        if fix.remaining_flips:
            orientation_report.warn(f"{fix.remaining_flips} inverted simplices remain")
        report.add(orientation_report)

    with _stage("diagnostics", timings):
        boundary_fmap = PiecewiseAffineMap(fmap.images[boundary_idx])
        report.diagnostics["sphere"] = _diagnostics_block(measured_boundary, boundary_fmap)
        report.diagnostics["ball"] = _diagnostics_block(measured, fmap)
    _finish(report, timings)
    return fmap, report
