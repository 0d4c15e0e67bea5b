import math

import numpy as np
import pytest

from vsem.complexcore.generate import (
    disk_twist_map,
    gen_ball_mesh,
    gen_blob_mesh,
    gen_ellipsoid_mesh,
    kuhn_cube_triangulation,
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
    total_volume,
)
from vsem.complexcore.topology import (
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
from vsem.complexcore.untangle import untangle, vertex_incidence
from vsem.errors import (
    DegenerateSimplexError,
    DimensionMismatchError,
    MeshValidationError,
    NonManifoldError,
    TopologyError,
)


def test_right_triangle_volume(right_triangle):
    assert simplex_volume(right_triangle, 0) == pytest.approx(0.5)
    assert signed_volume(right_triangle, 0) == pytest.approx(0.5)


def test_regular_tetrahedron_volume(regular_tetrahedron):
    # Edge length 2*sqrt(2): V = a^3 / (6 sqrt 2) = 8/3.
    assert simplex_volume(regular_tetrahedron, 0) == pytest.approx(8.0 / 3.0)


def test_triangle_in_space_uses_gram_determinant():
    complex = SimplicialComplex(
        np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 3.0]]), np.array([[0, 1, 2]])
    )
    assert simplex_volume(complex, 0) == pytest.approx(3.0)


def test_swapping_two_vertices_flips_the_sign(right_triangle):
    flipped = SimplicialComplex(right_triangle.vertices, np.array([[1, 0, 2]]))
    assert signed_volume(flipped, 0) == pytest.approx(-0.5)


def test_complex_rejects_bad_shapes():
    with pytest.raises(DimensionMismatchError):
        SimplicialComplex(np.zeros((3, 2)), np.array([[0, 1, 2, 0]]))
    with pytest.raises(MeshValidationError):
        SimplicialComplex(np.zeros((3, 2)), np.array([[0, 1, 3]]))
    with pytest.raises(MeshValidationError):
        SimplicialComplex(np.zeros((3, 2)), np.array([[0, 1, 1]]))


def test_measured_complex_masses_default_to_volumes(disk):
    measured = MeasuredComplex(disk)
    np.testing.assert_allclose(measured.masses, disk.volumes)
    assert measured.total_mass == pytest.approx(total_volume(disk))


def test_measured_complex_rejects_non_positive_density(right_triangle):
    with pytest.raises(MeshValidationError):
        MeasuredComplex(right_triangle, np.array([0.0]))
    with pytest.raises(DimensionMismatchError):
        MeasuredComplex(right_triangle, np.array([1.0, 2.0]))


def test_from_masses_recovers_density(disk):
    masses = np.linspace(1.0, 2.0, disk.n_simplices) * disk.volumes
    measured = MeasuredComplex.from_masses(disk, masses)
    np.testing.assert_allclose(measured.masses, masses)


def test_barycentric_coords_reproduce_the_point(regular_tetrahedron):
    point = np.array([0.1, -0.2, 0.3])
    coords = barycentric_coords(regular_tetrahedron, 0, point)
    assert coords.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(coords @ regular_tetrahedron.vertices, point, atol=1e-12)


def test_barycentric_coords_reject_degenerate_simplex():
    flat = SimplicialComplex(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), np.array([[0, 1, 2]]))
    with pytest.raises(DegenerateSimplexError):
        barycentric_coords(flat, 0, [0.5, 0.0])


def test_check_nondegenerate_names_the_simplex():
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 0.0]])
    complex = SimplicialComplex(vertices, np.array([[0, 1, 2], [0, 1, 3]]))
    with pytest.raises(DegenerateSimplexError) as info:
        check_nondegenerate(complex)
    assert info.value.simplex_id == 1


def test_normalize_orientation_counts_flips(disk):
    simplices = disk.simplices.copy()
    simplices[[0, 5]] = simplices[[0, 5]][:, [1, 0, 2]]
    normalized, count = normalize_orientation(SimplicialComplex(disk.vertices, simplices))
    assert count == 2
    assert np.all(signed_volumes(normalized.vertices, normalized.simplices) > 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_kuhn_cube_fills_the_cube(n):
    cube = kuhn_cube_triangulation(n, 2)
    assert cube.n_simplices == math.factorial(n) * 2**n
    assert total_volume(cube) == pytest.approx(2.0**n)
    assert np.all(signed_volumes(cube.vertices, cube.simplices) > 0)


@pytest.mark.parametrize("n", [2, 3])
def test_ball_mesh_boundary_on_unit_sphere(n):
    ball = gen_ball_mesh(n, 4)
    extraction = check_ball_topology(ball)
    radii = np.linalg.norm(ball.vertices[extraction.boundary_idx], axis=1)
    np.testing.assert_allclose(radii, 1.0, atol=1e-14)
    assert np.all(np.linalg.norm(ball.vertices[extraction.interior_idx], axis=1) < 1.0)


def test_ball_mesh_rejects_unsupported_input():
    with pytest.raises(DimensionMismatchError):
        gen_ball_mesh(5, 2)
    with pytest.raises(ValueError):
        gen_ball_mesh(2, 1)


def test_disk_area_below_pi(disk):
    assert 2.5 < total_volume(disk) < math.pi


def test_ellipsoid_scales_volume():
    axes = [0.8, 1.0, 1.2]
    ellipsoid = gen_ellipsoid_mesh(axes, 3)
    ball = gen_ball_mesh(3, 3)
    assert total_volume(ellipsoid) == pytest.approx(np.prod(axes) * total_volume(ball))
    with pytest.raises(ValueError):
        gen_ellipsoid_mesh([1.0, 0.0, 1.0], 3)


def test_blob_is_deterministic_per_seed():
    first = gen_blob_mesh(2, 4, 0.15, seed=3)
    again = gen_blob_mesh(2, 4, 0.15, seed=3)
    other = gen_blob_mesh(2, 4, 0.15, seed=4)
    np.testing.assert_array_equal(first.vertices, again.vertices)
    assert not np.allclose(first.vertices, other.vertices)
    assert np.all(signed_volumes(first.vertices, first.simplices) > 0)


def test_twist_with_zero_rate_is_identity(disk):
    np.testing.assert_allclose(disk_twist_map(disk, 0.0).images, disk.vertices)


def test_twist_is_a_rotation_per_vertex(disk):
    twisted = disk_twist_map(disk, 1.5)
    np.testing.assert_allclose(
        np.linalg.norm(twisted.images, axis=1), np.linalg.norm(disk.vertices, axis=1), atol=1e-14
    )


def test_twist_needs_planar_mesh(ball3):
    with pytest.raises(DimensionMismatchError):
        disk_twist_map(ball3, 1.0)


def test_map_domain_check(disk):
    with pytest.raises(DimensionMismatchError):
        PiecewiseAffineMap(np.zeros((3, 2))).check_domain(disk)


def test_disk_boundary_extraction(disk):
    extraction = boundary_complex(disk)
    assert extraction.complex.n_simplices == 16
    assert extraction.boundary_idx.size == 16
    assert extraction.interior_idx.size == 9
    assert euler_characteristic(extraction.complex.simplices) == 0
    assert is_closed(extraction.complex)


def test_ball_boundary_extraction(ball3):
    extraction = check_ball_topology(ball3)
    assert extraction.complex.n_simplices == 108
    assert extraction.boundary_idx.size == 56
    assert extraction.interior_idx.size == 8
    # Outward orientation: every boundary facet bounds a positive cone from the centre.
    assert np.all(cone_signed_volumes(extraction.complex.vertices, extraction.complex.simplices) > 0)


def test_euler_characteristics(disk, ball3, octahedron):
    assert euler_characteristic(disk.simplices) == 1
    assert euler_characteristic(ball3.simplices) == 1
    assert euler_characteristic(octahedron.simplices) == 2


def test_octahedron_is_a_sphere(octahedron):
    check_sphere_topology(octahedron)
    assert connected_components(octahedron) == 1
    assert np.all(cone_signed_volumes(octahedron.vertices, octahedron.simplices) > 0)


def test_sphere_check_rejects_open_surface(disk):
    with pytest.raises(TopologyError):
        check_sphere_topology(disk)


def test_ball_check_rejects_closed_surface(octahedron):
    with pytest.raises(TopologyError):
        check_ball_topology(octahedron)


def test_non_manifold_edge():
    vertices = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
    fan = SimplicialComplex(vertices, np.array([[0, 1, 2], [1, 0, 3], [0, 1, 4]]))
    with pytest.raises(NonManifoldError):
        boundary_complex(fan)


def test_interior_vertex_link_is_a_cycle(disk):
    centre = int(np.argmin(np.linalg.norm(disk.vertices, axis=1)))
    link = vertex_link(disk, centre)
    assert link.shape == (6, 2)
    _, counts = np.unique(link, return_counts=True)
    assert np.all(counts == 2)


def test_orient_closed_surface_repairs_inward_orientation(octahedron):
    inward = SimplicialComplex(octahedron.vertices, octahedron.simplices[:, [1, 0, 2]])
    repaired, flipped = orient_closed_surface(inward)
    assert flipped
    assert np.all(cone_signed_volumes(repaired.vertices, repaired.simplices) > 0)
    same, flipped = orient_closed_surface(octahedron)
    assert not flipped
    assert same is octahedron


def test_vertex_links_in_a_3_ball(ball3):
    extraction = boundary_complex(ball3)
    for v in extraction.interior_idx:
        assert euler_characteristic(vertex_link(ball3, int(v))) == 2
    for v in extraction.boundary_idx:
        assert euler_characteristic(vertex_link(ball3, int(v))) == 1


def test_blob_centre_stays_put():
    blob = gen_blob_mesh(3, 6)
    ball = gen_ball_mesh(3, 6)
    centre = int(np.argmin(np.linalg.norm(ball.vertices, axis=1)))
    np.testing.assert_allclose(blob.vertices[centre], 0.0, atol=1e-15)
    assert np.all(signed_volumes(blob.vertices, blob.simplices) > 0)


@pytest.mark.slow
def test_fine_blob_keeps_every_orientation():
    blob = gen_blob_mesh(3, 16)
    assert blob.n_vertices == 17**3
    assert np.all(signed_volumes(blob.vertices, blob.simplices) > 0)


# --- untangling ---
def _octagon():
    angles = np.arange(8) * np.pi / 4
    points = np.column_stack([np.cos(angles), np.sin(angles)])
    edges = np.column_stack([np.arange(8), (np.arange(8) + 1) % 8])
    return SimplicialComplex(points, edges)


def test_vertex_incidence(octahedron):
    incidence = vertex_incidence(octahedron.simplices, octahedron.n_vertices)
    assert incidence.shape == (6, 8)
    np.testing.assert_array_equal(np.asarray(incidence.sum(axis=1)).reshape(-1), 4)


def test_untangle_pulls_a_vertex_back_along_the_circle():
    octagon = _octagon()
    images = np.array(octagon.vertices)
    images[2] = [math.cos(5 * math.pi / 6), math.sin(5 * math.pi / 6)]
    signs = cone_signed_volumes(images, octagon.simplices)
    assert np.flatnonzero(signs <= 0).tolist() == [2]
    on_circle = np.ones(8, dtype=bool)
    result = untangle(
        octagon.simplices, images, cone_signed_volumes, vertex_adjacency(octagon), on_circle, on_circle
    )
    assert (result.initial_flips, result.remaining_flips, result.sweeps) == (1, 0, 1)
    assert result.moved.tolist() == [2]
    np.testing.assert_allclose(result.images[2], [0.0, 1.0], atol=1e-15)
    np.testing.assert_array_equal(np.delete(result.images, 2, axis=0), np.delete(images, 2, axis=0))


def test_untangle_leaves_fixed_vertices_alone():
    octagon = _octagon()
    images = np.array(octagon.vertices)
    images[2] = [math.cos(5 * math.pi / 6), math.sin(5 * math.pi / 6)]
    movable = np.zeros(8, dtype=bool)
    result = untangle(octagon.simplices, images, cone_signed_volumes, vertex_adjacency(octagon), movable)
    assert result.remaining_flips == result.initial_flips == 1
    assert result.sweeps == 0
    np.testing.assert_array_equal(result.images, images)
