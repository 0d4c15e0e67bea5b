"""Newton iteration for the volume- and sphere-constrained stretch energy."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from vsem.complexcore.simplicial import MeasuredComplex, PiecewiseAffineMap, simplex_volumes
from vsem.energy.stretch import vs_energy
from vsem.errors import CollapsedSimplexError, ConfigError
from vsem.linsolve import solve_saddle
from vsem.report import SolverReport
from vsem.sphere_init.stereo import renormalize
from vsem.sphere_newton.hessian import lagrangian_hessian
from vsem.sphere_newton.kkt import (
    KKTResidual,
    KKTState,
    kkt_residual,
    least_squares_multipliers,
    unvec,
    vec,
)

logger = logging.getLogger(__name__)

PROXIMAL_CAP = 1e-3
SHIFT_GROWTH = 100.0
MAX_SHIFT_RETRIES = 3


@dataclass(frozen=True)
class SphereSolverConfig:
    tol: float = 1e-12
    tol_kkt: float = 1e-9
    max_iterations: int = 30
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-8
    fd_step: float | None = None

    def __post_init__(self):
        if not self.tol > 0 or not self.tol_kkt > 0:
            raise ConfigError("sphere tolerances must be positive")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if not 0 < self.backtrack < 1:
            raise ConfigError(f"backtracking factor must be in (0, 1), got {self.backtrack}")


@dataclass(frozen=True, eq=False)
class NewtonStep:
    dg: np.ndarray
    dlam: float
    ds: np.ndarray
    regularized: bool
    residual: float
    asymmetry: float = 0.0
    shift: float = 0.0


def constraint_columns(volume_gradient: np.ndarray, images: np.ndarray) -> sparse.csc_matrix:
    """[vec(L_D(g) g), cdiag(g)]: column 0 is the volume gradient, column 1 + i holds g_i in block i."""
    n_rows, n_components = images.shape
    volume_col = sparse.csc_matrix(vec(volume_gradient)[:, None])
    rows = (np.arange(n_components)[:, None] * n_rows + np.arange(n_rows)[None, :]).reshape(-1)
    cols = np.tile(np.arange(n_rows), n_components)
    cdiag = sparse.csc_matrix(
        (vec(images), (rows, cols)), shape=(n_rows * n_components, n_rows)
    )
    return sparse.hstack([volume_col, cdiag], format="csc")


def rotation_columns(images: np.ndarray) -> sparse.csc_matrix:
    """vec(Omega_ab g) for every a < b: block a holds g[:, b], block b holds -g[:, a].

    The Lagrangian is invariant under rotations of the sphere, so these
    directions span a null space of the Hessian on the constraint tangent space.
    """
    n_rows, n_components = images.shape
    columns = []
    for a in range(n_components):
        for b in range(a + 1, n_components):
            column = np.zeros((n_rows, n_components))
            column[:, a] = images[:, b]
            column[:, b] = -images[:, a]
            columns.append(vec(column))
    return sparse.csc_matrix(np.column_stack(columns)) if columns else sparse.csc_matrix((n_rows * n_components, 0))


def hessian_scale(hessian: sparse.spmatrix) -> float:
    """Mean absolute diagonal entry; 1 for an all-zero diagonal."""
    diagonal = np.abs(hessian.diagonal())
    scale = float(diagonal.mean()) if diagonal.size else 0.0
    return scale if scale > 0 else 1.0


def newton_step(
    measured: MeasuredComplex,
    state: KKTState,
    residual: KKTResidual | None = None,
    fd_step: float | None = None,
    shift: float | None = None,
) -> NewtonStep:
    """Solve [[H + tau I, a, C, R], [a^T, 0, 0, 0], [C^T, 0, 0, 0], [R^T, 0, 0, 0]] for (dg, dlam, ds).

    R holds the rotation generators at g, so the step carries no rigid
    rotation. ``shift`` is the proximal weight tau relative to the Hessian
    scale; by default min(1e-3, merit). The constraint rows stay exact.
    """
    residual = residual or kkt_residual(measured, state)
    images = state.g.images
    n_rows = images.shape[0]
    hessian, asymmetry = lagrangian_hessian(measured, state, fd_step)
    relative = min(PROXIMAL_CAP, residual.merit) if shift is None else shift
    tau = relative * hessian_scale(hessian)
    if tau > 0:
        hessian = (hessian + tau * sparse.identity(hessian.shape[0], format="csr")).tocsr()
    gauge = rotation_columns(images)
    border = sparse.hstack([constraint_columns(residual.volume_gradient, images), gauge], format="csc")
    rhs = np.concatenate([-residual.stacked(), np.zeros(gauge.shape[1])])
    solution = solve_saddle(hessian, border, rhs)
    return NewtonStep(
        dg=unvec(solution.x, n_rows),
        dlam=float(solution.multipliers[0]),
        ds=solution.multipliers[1 : 1 + n_rows],
        regularized=solution.regularized,
        residual=solution.residual,
        asymmetry=asymmetry,
        shift=tau,
    )


def _project(state: KKTState) -> tuple[KKTState, float]:
    images, correction = renormalize(state.g.images)
    return KKTState(PiecewiseAffineMap(images), state.lam, state.s, state.target), correction


def _line_search(
    measured: MeasuredComplex,
    state: KKTState,
    step: NewtonStep,
    merit: float,
    config: SphereSolverConfig,
):
    """Backtracking on the KKT 2-norm; returns (alpha, state, residual, correction) or None."""
    alpha = 1.0
    while alpha >= config.min_step:
        trial, correction = _project(state.moved(step.dg, step.dlam, step.ds, alpha))
        try:
            trial_residual = kkt_residual(measured, trial)
        except CollapsedSimplexError:
            alpha *= config.backtrack
            continue
        if trial_residual.merit <= (1.0 - config.armijo * alpha) * merit:
            return alpha, trial, trial_residual, correction
        alpha *= config.backtrack
    return None


def _feasible(residual: KKTResidual, config: SphereSolverConfig) -> bool:
    return max(abs(residual.volume), float(np.max(np.abs(residual.sphere)))) <= config.tol_kkt


def _skip_iterations(tol: float, energy: float) -> bool:
    """No step can lower E_V by more than E_V itself, so tol >= E_V is met before iterating."""
    return not math.isfinite(tol) or tol >= energy


def solve_sphere(
    measured: MeasuredComplex,
    initial: PiecewiseAffineMap,
    target: float | None = None,
    config: SphereSolverConfig | None = None,
) -> tuple[PiecewiseAffineMap, SolverReport]:
    """Minimize E_V on S^(n-1) subject to |g(M)| = C'.

    ``target`` defaults to the initial image volume. Stops once the KKT merit
    is at most ``tol_kkt``, or once a step changes E_V by at most ``tol`` with
    both constraints met to ``tol_kkt``. A non-finite ``tol`` or one at least
    E_V returns the initial map untouched.
    """
    config = config or SphereSolverConfig()
    report = SolverReport(stage="sphere_newton")
    complex = measured.complex
    initial.check_domain(complex)
    if target is None:
        target = float(simplex_volumes(initial.images, complex.simplices).sum())
    report.details.update(
        {
            "target_volume": target,
            "multiplier_init": "least_squares",
            "merit": "kkt_2norm",
            "gauge": "rotation",
            "tol": config.tol,
            "tol_kkt": config.tol_kkt,
        }
    )
    energy = vs_energy(measured, initial)
    report.energy_trace.append(energy)
    if _skip_iterations(config.tol, energy):
        logger.info(f"Sphere Newton skipped: tol {config.tol:.3e} is not below E_V = {energy:.6e}.")
        report.converged = True
        return initial, report

    g, correction = renormalize(initial.images)
    lam, s = least_squares_multipliers(measured, PiecewiseAffineMap(g))
    state = KKTState(PiecewiseAffineMap(g), lam, s, target)
    residual = kkt_residual(measured, state)
    report.merit_trace.append(residual.merit)
    regularized = 0
    max_asymmetry = 0.0
    max_shift = 0.0
    max_correction = correction
    logger.info(f"Sphere Newton start: E_V = {energy:.12e}, merit = {residual.merit:.3e}, lambda = {lam:.6e}.")

    while report.iterations < config.max_iterations:
        if residual.merit <= config.tol_kkt:
            report.converged = True
            break
        found = None
        relative = min(PROXIMAL_CAP, residual.merit)
        for attempt in range(MAX_SHIFT_RETRIES + 1):
            step = newton_step(measured, state, residual, config.fd_step, shift=relative)
            regularized += int(step.regularized)
            max_asymmetry = max(max_asymmetry, step.asymmetry)
            max_shift = max(max_shift, step.shift)
            found = _line_search(measured, state, step, residual.merit, config)
            if found is not None:
                break
            relative *= SHIFT_GROWTH
            logger.info(f"Line search failed; retrying with proximal weight {relative:.1e} (attempt {attempt + 1}).")
        if found is None:
            report.warn(
                f"line search failed below step {config.min_step:.0e} at merit {residual.merit:.3e}; "
                "returning the best iterate"
            )
            break
        alpha, state, residual, correction = found
        max_correction = max(max_correction, correction)
        new_energy = vs_energy(measured, state.g)
        delta = energy - new_energy
        energy = new_energy
        report.iterations += 1
        report.energy_trace.append(energy)
        report.delta_energy_trace.append(delta)
        report.merit_trace.append(residual.merit)
        report.step_sizes.append(alpha)
        logger.info(
            f"Sphere Newton iteration {report.iterations}: E_V = {energy:.12e}, dE = {delta:.3e}, "
            f"merit = {residual.merit:.3e}, alpha = {alpha:.3g}, renormalization {correction:.2e}."
        )
        if abs(delta) <= config.tol and _feasible(residual, config):
            report.converged = True
            break
    else:
        if residual.merit <= config.tol_kkt:
            report.converged = True
        else:
            report.warn(f"no convergence after {config.max_iterations} iterations (merit {residual.merit:.3e})")

    report.details.update(
        {
            "lambda": state.lam,
            "final_merit": residual.merit,
            "final_volume_residual": residual.volume,
            "regularized_solves": regularized,
            "max_hessian_asymmetry": max_asymmetry,
            "max_proximal_shift": max_shift,
            "max_renormalization": max_correction,
        }
    )
    return state.g, report
