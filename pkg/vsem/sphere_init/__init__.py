from vsem.sphere_init.dirac import (
    dirac_map,
    dirac_rhs,
    most_regular_simplex,
    orientation_signs,
    pin_vertex,
    regularity,
)
from vsem.sphere_init.sem import SemConfig, sem_iterate
from vsem.sphere_init.stereo import (
    StereoPoints,
    project_with_infinity,
    renormalize,
    stereo_project,
    stereo_unproject,
)

__all__ = [
    "SemConfig",
    "StereoPoints",
    "dirac_map",
    "dirac_rhs",
    "most_regular_simplex",
    "orientation_signs",
    "pin_vertex",
    "project_with_infinity",
    "regularity",
    "renormalize",
    "sem_iterate",
    "stereo_project",
    "stereo_unproject",
]
