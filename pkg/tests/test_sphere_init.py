import numpy as np
import pytest
from scipy import sparse

from vsem.complexcore.simplicial import MeasuredComplex, PiecewiseAffineMap, barycentric_coords
from vsem.complexcore.topology import boundary_complex
from vsem.energy.stretch import vs_energy
from vsem.errors import ConfigError, DimensionMismatchError, EmptyInteriorError, PoleError
from vsem.sphere_init import sem as sem_module
from vsem.sphere_init.dirac import (
    dirac_map,
    dirac_rhs,
    most_regular_simplex,
    orientation_signs,
    pin_vertex,
    regularity,
)
from vsem.sphere_init.sem import SemConfig, _interior_split, sem_iterate
from vsem.sphere_init.stereo import (
    StereoPoints,
    project_with_infinity,
    renormalize,
    stereo_project,
    stereo_unproject,
)


@pytest.fixture
def surface(ball3):
    return boundary_complex(ball3).complex


def _random_sphere_points(count: int, n: int, seed: int = 2) -> np.ndarray:
    points = np.random.default_rng(seed).standard_normal((count, n))
    points = points / np.linalg.norm(points, axis=1, keepdims=True)
    points[:, -1] = np.minimum(points[:, -1], 0.99)
    return points / np.linalg.norm(points, axis=1, keepdims=True)


# --- stereographic projection ---
def test_south_pole_maps_to_origin():
    np.testing.assert_allclose(stereo_project(np.array([[0.0, 0.0, -1.0]])), [[0.0, 0.0]])
    np.testing.assert_allclose(stereo_unproject(np.zeros((1, 2))), [[0.0, 0.0, -1.0]])


def test_equator_maps_to_unit_circle():
    plane = stereo_project(np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]))
    np.testing.assert_allclose(np.linalg.norm(plane, axis=1), 1.0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_unproject_inverts_project(n):
    points = _random_sphere_points(20, n)
    np.testing.assert_allclose(stereo_unproject(stereo_project(points)), points, atol=1e-12)


def test_projecting_the_pole_raises():
    with pytest.raises(PoleError):
        stereo_project(np.array([[0.0, 0.0, 1.0]]))


def test_pole_becomes_symbolic_infinity():
    points = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    plane = project_with_infinity(points)
    np.testing.assert_array_equal(plane.infinite, [True, False])
    assert np.isinf(plane.norms()[0])
    np.testing.assert_allclose(plane.unproject(), points, atol=1e-15)


def test_inversion_mirrors_the_last_coordinate():
    points = _random_sphere_points(15, 3, seed=4)
    plane = project_with_infinity(points)
    mirrored = plane.inverted().unproject()
    expected = points.copy()
    expected[:, -1] = -expected[:, -1]
    np.testing.assert_allclose(mirrored, expected, atol=1e-12)


def test_inversion_swaps_origin_and_infinity():
    plane = StereoPoints(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 0.0]]), np.array([False, False, True]))
    inverted = plane.inverted()
    np.testing.assert_array_equal(inverted.infinite, [True, False, False])
    np.testing.assert_allclose(inverted.coords[1], [0.5, 0.0])
    np.testing.assert_allclose(inverted.coords[2], [0.0, 0.0])


def test_with_coords_clears_infinity():
    plane = StereoPoints(np.zeros((2, 2)), np.array([True, False]))
    moved = plane.with_coords(np.array([0]), np.array([[0.3, 0.4]]))
    assert not moved.infinite.any()
    assert moved.norms()[0] == pytest.approx(0.5)


def test_renormalize_reports_the_correction():
    points, correction = renormalize(np.array([[2.0, 0.0], [0.0, 0.5]]))
    np.testing.assert_allclose(points, [[1.0, 0.0], [0.0, 1.0]])
    assert correction == pytest.approx(1.0)
    with pytest.raises(ValueError):
        renormalize(np.zeros((1, 3)))


# --- Dirac map ---
def test_regular_simplex_has_maximal_regularity(regular_tetrahedron, right_triangle):
    assert regularity(regular_tetrahedron)[0] == pytest.approx(1.0 / 3.0)
    # Right isosceles triangle: r = 1 / (2 + sqrt 2), R = sqrt(2) / 2.
    expected = (1.0 / (2.0 + np.sqrt(2.0))) / (np.sqrt(2.0) / 2.0)
    assert regularity(right_triangle)[0] == pytest.approx(expected)


def test_pin_is_far_from_the_source(octahedron):
    source = most_regular_simplex(octahedron)
    pin = pin_vertex(octahedron, source)
    assert pin not in octahedron.simplices[source]


def test_dirac_rhs_columns_sum_to_zero(surface):
    b = dirac_rhs(surface, 7)
    assert b.shape == (surface.n_vertices, 2)
    np.testing.assert_allclose(b.sum(axis=0), 0.0, atol=1e-12)
    assert np.count_nonzero(np.any(b != 0, axis=1)) == 3


def test_dirac_map_lands_on_the_sphere(surface):
    images = dirac_map(surface).images
    np.testing.assert_allclose(np.linalg.norm(images, axis=1), 1.0, atol=1e-12)
    signs = orientation_signs(surface, images)
    assert np.sum(signs > 0) > np.sum(signs < 0)


def test_dirac_map_does_not_depend_on_the_pin(surface):
    source = most_regular_simplex(surface)
    candidates = [v for v in range(surface.n_vertices) if v not in surface.simplices[source]]
    measured = MeasuredComplex(surface)
    first = dirac_map(surface, source, candidates[0])
    second = dirac_map(surface, source, candidates[-1])
    np.testing.assert_allclose(first.images, second.images, atol=1e-8)
    assert vs_energy(measured, first) == pytest.approx(vs_energy(measured, second), rel=1e-6)


def test_dirac_map_needs_codimension_one(disk):
    with pytest.raises(DimensionMismatchError):
        dirac_map(disk)


def test_dirac_rhs_rows_are_barycentric_gradients(surface):
    source = 7
    b = dirac_rhs(surface, source)
    corners = surface.vertices[surface.simplices[source]]
    q, _ = np.linalg.qr((corners[1:] - corners[0]).T, mode="reduced")
    centre = corners.mean(axis=0)
    step = 1e-3
    for j in range(q.shape[1]):
        forward = barycentric_coords(surface, source, centre + step * q[:, j])
        backward = barycentric_coords(surface, source, centre - step * q[:, j])
        np.testing.assert_allclose((forward - backward) / (2 * step), b[surface.simplices[source], j], atol=1e-8)


def test_dirac_map_has_no_inverted_facets(surface):
    images = dirac_map(surface).images
    assert np.all(orientation_signs(surface, images) > 0)


# --- SEM ---
def test_sem_config_validation():
    with pytest.raises(ConfigError):
        SemConfig(radius=0.0)
    with pytest.raises(ConfigError):
        SemConfig(max_iterations=0)


def test_sem_never_increases_the_energy(surface):
    measured = MeasuredComplex(surface)
    initial = dirac_map(surface)
    result, report = sem_iterate(measured, initial, SemConfig(max_iterations=20))
    trace = report.energy_trace
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert vs_energy(measured, result) == pytest.approx(trace[-1], rel=1e-12)
    assert trace[-1] <= vs_energy(measured, initial)
    np.testing.assert_allclose(np.linalg.norm(result.images, axis=1), 1.0, atol=1e-12)
    assert report.stage == "sem"


def test_sem_rejects_an_empty_interior(surface):
    measured = MeasuredComplex(surface)
    with pytest.raises(EmptyInteriorError):
        sem_iterate(measured, dirac_map(surface), SemConfig(radius=1e-9))


def test_sem_checks_the_domain(surface):
    with pytest.raises(DimensionMismatchError):
        sem_iterate(MeasuredComplex(surface), PiecewiseAffineMap(np.zeros((3, 3))))



def test_interior_radius_is_relative_to_the_median():
    path = np.diag([1.0, 2.0, 2.0, 2.0, 1.0]) - np.eye(5, k=1) - np.eye(5, k=-1)
    laplacian = sparse.csr_matrix(path)
    coords = np.array([[0.1, 0.0], [0.5, 0.0], [1.0, 0.0], [2.0, 0.0], [4.0, 0.0]])
    plane = StereoPoints(coords, np.zeros(5, dtype=bool))
    expected = [True, True, True, False, False]
    np.testing.assert_array_equal(_interior_split(laplacian, plane, 1.2), expected)
    np.testing.assert_array_equal(_interior_split(laplacian, StereoPoints(1e3 * coords, plane.infinite), 1.2), expected)
    # Median of the finite norms is 0.75; vertex 3 touches the point at infinity.
    with_pole = StereoPoints(coords, [False, False, False, False, True])
    np.testing.assert_array_equal(_interior_split(laplacian, with_pole, 1.2), [True, True, False, False, False])


def test_sem_skips_when_the_tolerance_exceeds_the_energy(surface):
    measured = MeasuredComplex(surface)
    initial = dirac_map(surface)
    result, report = sem_iterate(measured, initial, SemConfig(tol=1e308))
    assert result is initial
    assert report.iterations == 0
    assert report.converged
    assert report.energy_trace == [vs_energy(measured, initial)]


def test_sem_warns_when_the_first_iteration_raises_the_energy(surface, monkeypatch):
    measured = MeasuredComplex(surface)
    initial = dirac_map(surface)
    energies = iter([1.0, 2.0])
    monkeypatch.setattr(sem_module, "vs_energy", lambda measured, fmap: next(energies))
    result, report = sem_iterate(measured, initial)
    assert report.stalled
    assert not report.converged
    assert report.has_warnings
    assert report.iterations == 0
    np.testing.assert_array_equal(result.images, initial.images)


def test_sem_stops_quietly_on_a_later_increase(surface, monkeypatch):
    measured = MeasuredComplex(surface)
    energies = iter([3.0, 2.0, 2.5])
    monkeypatch.setattr(sem_module, "vs_energy", lambda measured, fmap: next(energies))
    _, report = sem_iterate(measured, dirac_map(surface))
    assert report.iterations == 1
    assert report.converged
    assert not report.stalled
    assert not report.has_warnings
    assert report.details["stopped_on_increase"]
