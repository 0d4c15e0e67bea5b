from vsem.sphere_newton.hessian import distance2_coloring, fd_hessian, lagrangian_hessian
from vsem.sphere_newton.kkt import (
    KKTResidual,
    KKTState,
    kkt_residual,
    least_squares_multipliers,
    stationarity,
    unvec,
    vec,
)
from vsem.sphere_newton.solver import (
    NewtonStep,
    SphereSolverConfig,
    constraint_columns,
    newton_step,
    solve_sphere,
)

__all__ = [
    "KKTResidual",
    "KKTState",
    "NewtonStep",
    "SphereSolverConfig",
    "constraint_columns",
    "distance2_coloring",
    "fd_hessian",
    "kkt_residual",
    "lagrangian_hessian",
    "least_squares_multipliers",
    "newton_step",
    "solve_sphere",
    "stationarity",
    "unvec",
    "vec",
]
