from vsem.ball_solver.interior import (
    InteriorConfig,
    fixed_point_interior,
    harmonic_interior,
    interior_gradient_norm,
)
from vsem.ball_solver.orientation import OrientationFix, count_flips, fix_orientation
from vsem.ball_solver.pca import PcaTransform, pca_normalize_boundary
from vsem.ball_solver.pipeline import BallPipelineConfig, parameterize_ball, parameterize_sphere
from vsem.ball_solver.protocol import EllipsoidProtocol

__all__ = [
    "BallPipelineConfig",
    "EllipsoidProtocol",
    "InteriorConfig",
    "OrientationFix",
    "PcaTransform",
    "count_flips",
    "fix_orientation",
    "fixed_point_interior",
    "harmonic_interior",
    "interior_gradient_norm",
    "parameterize_ball",
    "parameterize_sphere",
    "pca_normalize_boundary",
]
