from vsem.complexcore.generate import (
    disk_twist_map,
    gen_ball_mesh,
    gen_blob_mesh,
    gen_ellipsoid_mesh,
    kuhn_cube_triangulation,
)
from vsem.complexcore.nsc import (
    MeshRecord,
    read_map,
    read_mesh,
    read_mesh_record,
    write_map,
    write_mesh,
)
from vsem.complexcore.simplicial import (
    MeasuredComplex,
    PiecewiseAffineMap,
    SimplicialComplex,
    barycentric_coords,
    check_nondegenerate,
    cone_signed_volumes,
    normalize_orientation,
    signed_volume,
    signed_volumes,
    simplex_volume,
    simplex_volumes,
    total_volume,
)
from vsem.complexcore.topology import (
    BoundaryExtraction,
    boundary_complex,
    check_ball_topology,
    check_sphere_topology,
    connected_components,
    euler_characteristic,
    is_closed,
    orient_closed_surface,
    vertex_adjacency,
    vertex_link,
)
from vsem.complexcore.untangle import UntangleResult, untangle, vertex_incidence

__all__ = [
    "BoundaryExtraction",
    "MeasuredComplex",
    "MeshRecord",
    "PiecewiseAffineMap",
    "SimplicialComplex",
    "UntangleResult",
    "barycentric_coords",
    "boundary_complex",
    "check_ball_topology",
    "check_nondegenerate",
    "check_sphere_topology",
    "cone_signed_volumes",
    "connected_components",
    "disk_twist_map",
    "euler_characteristic",
    "gen_ball_mesh",
    "gen_blob_mesh",
    "gen_ellipsoid_mesh",
    "is_closed",
    "kuhn_cube_triangulation",
    "normalize_orientation",
    "orient_closed_surface",
    "read_map",
    "read_mesh",
    "read_mesh_record",
    "signed_volume",
    "signed_volumes",
    "simplex_volume",
    "simplex_volumes",
    "total_volume",
    "untangle",
    "vertex_adjacency",
    "vertex_incidence",
    "vertex_link",
    "write_map",
    "write_mesh",
]
