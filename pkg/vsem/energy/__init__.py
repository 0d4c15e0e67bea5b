from vsem.energy.export import (
    ratio_histogram,
    summary_json,
    write_diagnostics_csv,
    write_ratio_csv,
    write_summary_json,
)
from vsem.energy.laplacian import (
    LaplacianAssembler,
    SparseLaplacian,
    assemble_both,
    assemble_dirichlet_laplacian,
    assemble_image_dirichlet_laplacian,
    assemble_vs_laplacian,
    assembler_for,
    barycentric_gradients,
    cotangent_weights,
    dihedral_cotangents,
    edge_pairs,
    image_volumes,
)
from vsem.energy.stretch import (
    StretchDiagnostics,
    diagnostics,
    diagnostics_from_volumes,
    dirichlet_energy,
    image_volume_gradient,
    image_volume_trace,
    negative_weight_fraction,
    normalized_diagnostics,
    stretch_factor,
    stretch_factors,
    unit_ball_volume,
    unit_sphere_area,
    vs_energy,
    vs_energy_trace,
    vs_gradient,
)

__all__ = [
    "LaplacianAssembler",
    "SparseLaplacian",
    "StretchDiagnostics",
    "assemble_both",
    "assemble_dirichlet_laplacian",
    "assemble_image_dirichlet_laplacian",
    "assemble_vs_laplacian",
    "assembler_for",
    "barycentric_gradients",
    "cotangent_weights",
    "diagnostics",
    "diagnostics_from_volumes",
    "dihedral_cotangents",
    "dirichlet_energy",
    "edge_pairs",
    "image_volume_gradient",
    "image_volume_trace",
    "image_volumes",
    "negative_weight_fraction",
    "normalized_diagnostics",
    "ratio_histogram",
    "stretch_factor",
    "stretch_factors",
    "summary_json",
    "unit_ball_volume",
    "unit_sphere_area",
    "vs_energy",
    "vs_energy_trace",
    "vs_gradient",
    "write_diagnostics_csv",
    "write_ratio_csv",
    "write_summary_json",
]
