import logging
from dataclasses import dataclass

import numpy as np

from vsem.complexcore.simplicial import MeasuredComplex, PiecewiseAffineMap, SimplicialComplex, signed_volumes
from vsem.complexcore.topology import vertex_adjacency
from vsem.complexcore.untangle import untangle
from vsem.energy.stretch import vs_energy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrientationFix:
    initial_flips: int
    remaining_flips: int
    sweeps: int
    mirrored: bool
    moved_vertices: int
    energy_change: float = 0.0


def count_flips(complex: SimplicialComplex, fmap: PiecewiseAffineMap) -> int:
    return int(np.sum(signed_volumes(fmap.images, complex.simplices) <= 0))


def fix_orientation(
    measured: MeasuredComplex,
    fmap: PiecewiseAffineMap,
    interior_idx: np.ndarray,
    max_sweeps: int = 10,
) -> tuple[PiecewiseAffineMap, OrientationFix]:
    """Unflip inverted image simplices by local vertex moves.

    A map whose simplices are mostly inverted is first mirrored in its first
    coordinate. Interior vertices then move towards their neighbour average;
    boundary vertices move along the sphere towards the normalized average of
    their boundary neighbours. A move is kept only if the inversions around
    the vertex do not rise, so the flip count is non-increasing.
    """
    complex = measured.complex
    images = np.array(fmap.images)
    signs = signed_volumes(images, complex.simplices)
    mirrored = False
    if np.sum(signs < 0) > np.sum(signs > 0):
        images[:, 0] = -images[:, 0]
        mirrored = True
        logger.warning("Global orientation flip detected; mirrored the map before repairing.")

    on_sphere = np.ones(complex.n_vertices, dtype=bool)
    on_sphere[np.asarray(interior_idx, dtype=np.int64)] = False
    result = untangle(
        complex.simplices,
        images,
        signed_volumes,
        vertex_adjacency(complex),
        movable=np.ones(complex.n_vertices, dtype=bool),
        on_sphere=on_sphere,
        max_sweeps=max_sweeps,
    )
    repaired = PiecewiseAffineMap(result.images)

    energy_change = 0.0
    if result.moved.size:
        energy_change = vs_energy(measured, repaired) - vs_energy(measured, PiecewiseAffineMap(images))
        boundary_moved = int(np.sum(on_sphere[result.moved]))
        logger.info(
            f"Orientation repair: {result.initial_flips} -> {result.remaining_flips} flips in {result.sweeps} sweeps, "
            f"moved {result.moved.size} vertices ({boundary_moved} on the boundary), dE_V = {energy_change:+.3e}."
        )
    if result.remaining_flips:
        logger.warning(f"{result.remaining_flips} inverted simplices remain after {result.sweeps} sweeps.")
    fix = OrientationFix(
        result.initial_flips,
        result.remaining_flips,
        result.sweeps,
        mirrored,
        int(result.moved.size),
        float(energy_change),
    )
    return repaired, fix
