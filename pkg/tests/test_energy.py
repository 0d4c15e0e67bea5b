import csv
import json
import math

import numpy as np
import pytest

from vsem.complexcore.generate import disk_twist_map, gen_ball_mesh
from vsem.complexcore.simplicial import MeasuredComplex, PiecewiseAffineMap, SimplicialComplex, total_volume
from vsem.complexcore.topology import boundary_complex
from vsem.energy.export import (
    DIAGNOSTICS_COLUMNS,
    ratio_histogram,
    summary_json,
    write_diagnostics_csv,
    write_ratio_csv,
)
from vsem.energy.laplacian import (
    assemble_both,
    assemble_dirichlet_laplacian,
    assemble_vs_laplacian,
    barycentric_gradients,
    cotangent_weights,
    dihedral_cotangents,
)
from vsem.energy.stretch import (
    diagnostics,
    diagnostics_from_volumes,
    dirichlet_energy,
    image_volume_gradient,
    image_volume_trace,
    normalized_diagnostics,
    stretch_factor,
    stretch_factors,
    unit_ball_volume,
    unit_sphere_area,
    vs_energy,
    vs_energy_trace,
    vs_gradient,
)
from vsem.errors import CollapsedSimplexError, DegenerateSimplexError


def _wobbled(complex: SimplicialComplex, scale: float = 0.03, seed: int = 7) -> PiecewiseAffineMap:
    rng = np.random.default_rng(seed)
    return PiecewiseAffineMap(complex.vertices + scale * rng.standard_normal(complex.vertices.shape))


def test_right_triangle_weights_are_half_cotangents(right_triangle):
    weights, volumes = cotangent_weights(right_triangle.vertices, right_triangle.simplices)
    np.testing.assert_allclose(weights[0], [0.5, 0.5, 0.0], atol=1e-15)
    assert volumes[0] == pytest.approx(0.5)


def test_barycentric_gradients_sum_to_zero(regular_tetrahedron):
    grads, _ = barycentric_gradients(regular_tetrahedron.vertices, regular_tetrahedron.simplices)
    np.testing.assert_allclose(grads[0].sum(axis=0), 0.0, atol=1e-14)
    # grad(alpha_i) . (v_j - v_0) = delta_ij - delta_i0
    edges = regular_tetrahedron.vertices[1:] - regular_tetrahedron.vertices[0]
    np.testing.assert_allclose(grads[0][1:] @ edges.T, np.eye(3), atol=1e-14)


def test_barycentric_gradients_stay_in_the_affine_hull():
    points = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    grads, volumes = barycentric_gradients(points, np.array([[0, 1, 2]]))
    np.testing.assert_allclose(grads[0][:, 2], 0.0, atol=1e-15)
    assert volumes[0] == pytest.approx(1.0)


def test_collapsed_simplex_is_reported():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    with pytest.raises(CollapsedSimplexError) as info:
        barycentric_gradients(points, np.array([[0, 1, 3], [0, 1, 2]]))
    assert info.value.simplex_id == 1


def test_regular_tetrahedron_dihedral_cotangents(regular_tetrahedron):
    cotangents = dihedral_cotangents(regular_tetrahedron.vertices, regular_tetrahedron.simplices, 0)
    assert len(cotangents) == 6
    for value in cotangents.values():
        assert value == pytest.approx(1.0 / (2.0 * math.sqrt(2.0)))


def test_tetrahedron_weights_match_dihedral_formula(regular_tetrahedron):
    # w_ij = |opposite edge| cot(theta_ij) / (k (k - 1)) for k = 3.
    weights, _ = cotangent_weights(regular_tetrahedron.vertices, regular_tetrahedron.simplices)
    edge = 2.0 * math.sqrt(2.0)
    np.testing.assert_allclose(weights[0], edge / (2.0 * math.sqrt(2.0)) / 6.0)


def test_dihedral_cotangents_need_dimension_two():
    points = np.array([[0.0], [1.0]])
    with pytest.raises(ValueError):
        dihedral_cotangents(points, np.array([[0, 1]]), 0)


@pytest.mark.parametrize("n", [2, 3])
def test_dirichlet_laplacian_is_symmetric_with_zero_row_sums(n):
    ball = gen_ball_mesh(n, 3)
    laplacian = assemble_dirichlet_laplacian(ball).toarray()
    np.testing.assert_allclose(laplacian, laplacian.T, atol=1e-14)
    np.testing.assert_allclose(laplacian.sum(axis=1), 0.0, atol=1e-12)


def test_dirichlet_laplacian_annihilates_linear_functions_inside(disk):
    laplacian = assemble_dirichlet_laplacian(disk)
    interior = boundary_complex(disk).interior_idx
    linear = disk.vertices @ np.array([[2.0, -1.0], [0.5, 3.0]])
    np.testing.assert_allclose((laplacian @ linear)[interior], 0.0, atol=1e-12)


def test_degenerate_domain_rejected():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DegenerateSimplexError):
        assemble_dirichlet_laplacian(SimplicialComplex(points, np.array([[0, 1, 2]])))


@pytest.mark.parametrize("n", [2, 3])
def test_identity_map_energies(n):
    ball = gen_ball_mesh(n, 3)
    identity = PiecewiseAffineMap(ball.vertices)
    volume = total_volume(ball)
    assert dirichlet_energy(ball, identity) == pytest.approx(volume, rel=1e-12)
    assert image_volume_trace(ball, identity) == pytest.approx(volume, rel=1e-12)
    assert vs_energy(MeasuredComplex(ball), identity) == pytest.approx(volume, rel=1e-12)


def test_vs_energy_trace_form_agrees(disk):
    measured = MeasuredComplex(disk, np.linspace(0.5, 2.0, disk.n_simplices))
    fmap = _wobbled(disk)
    assert vs_energy_trace(measured, fmap) == pytest.approx(vs_energy(measured, fmap), rel=1e-10)


def test_vs_energy_trace_form_on_a_surface(ball3):
    surface = boundary_complex(ball3).complex
    measured = MeasuredComplex(surface)
    fmap = _wobbled(surface, 0.02)
    assert vs_energy_trace(measured, fmap) == pytest.approx(vs_energy(measured, fmap), rel=1e-10)


@pytest.mark.parametrize("surface", [False, True])
def test_gradients_match_finite_differences(ball3, surface):
    complex = boundary_complex(ball3).complex if surface else ball3
    measured = MeasuredComplex(complex)
    fmap = _wobbled(complex, 0.02, seed=11)
    energy_grad = vs_gradient(measured, fmap)
    volume_grad = image_volume_gradient(complex, fmap)
    step = 1e-6
    for vertex, axis in [(0, 0), (5, 1), (complex.n_vertices - 1, 2)]:
        plus = np.array(fmap.images)
        minus = np.array(fmap.images)
        plus[vertex, axis] += step
        minus[vertex, axis] -= step
        fd_energy = (
            vs_energy(measured, PiecewiseAffineMap(plus)) - vs_energy(measured, PiecewiseAffineMap(minus))
        ) / (2 * step)
        fd_volume = (
            image_volume_trace(complex, PiecewiseAffineMap(plus))
            - image_volume_trace(complex, PiecewiseAffineMap(minus))
        ) / (2 * step)
        assert energy_grad[vertex, axis] == pytest.approx(fd_energy, rel=1e-5, abs=1e-8)
        assert volume_grad[vertex, axis] == pytest.approx(fd_volume, rel=1e-5, abs=1e-8)


def test_assemble_both_is_consistent(disk):
    measured = MeasuredComplex(disk)
    fmap = _wobbled(disk)
    l_v, l_d, volumes = assemble_both(measured, fmap)
    np.testing.assert_allclose(l_v.toarray(), assemble_vs_laplacian(measured, fmap).toarray())
    assert l_d.matrix.nnz == l_v.matrix.nnz
    assert volumes.sum() == pytest.approx(image_volume_trace(disk, fmap), rel=1e-12)


def test_vs_laplacian_scales_with_stretch(disk):
    measured = MeasuredComplex(disk)
    doubled = PiecewiseAffineMap(2.0 * disk.vertices)
    # Areas grow by 4 and cotangent weights are scale invariant in 2D.
    np.testing.assert_allclose(
        assemble_vs_laplacian(measured, doubled).toarray(),
        4.0 * assemble_dirichlet_laplacian(disk).toarray(),
        atol=1e-12,
    )


def test_stretch_factors(disk):
    measured = MeasuredComplex(disk)
    doubled = PiecewiseAffineMap(2.0 * disk.vertices)
    np.testing.assert_allclose(stretch_factors(measured, doubled), 0.25)
    assert stretch_factor(measured, doubled, 3) == pytest.approx(0.25)


def test_stretch_factor_on_collapsed_image(right_triangle):
    measured = MeasuredComplex(right_triangle)
    collapsed = PiecewiseAffineMap(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    with pytest.raises(CollapsedSimplexError):
        stretch_factors(measured, collapsed)


def test_hand_computed_diagnostics():
    diag = diagnostics_from_volumes(np.array([0.5, 1.5]), np.array([1.0, 1.0]))
    assert diag.energy == pytest.approx(2.5)
    assert diag.lower_bound == pytest.approx(2.0)
    assert diag.epsilon == pytest.approx(0.5)
    np.testing.assert_allclose(diag.delta, [-0.5, 0.5])
    assert diag.mean_delta == pytest.approx(0.0)
    assert diag.sd_delta == pytest.approx(0.5)
    low, high = diag.sandwich_bounds
    assert low == pytest.approx(0.5) and high == pytest.approx(0.5)
    assert diag.sandwich_holds()


def test_sandwich_with_uneven_masses():
    rng = np.random.default_rng(5)
    masses = rng.uniform(0.5, 2.0, 40)
    volumes = masses * rng.uniform(0.8, 1.2, 40)
    diag = diagnostics_from_volumes(volumes, masses)
    assert diag.epsilon >= 0.0
    assert diag.sandwich_holds()
    assert np.sum(diag.masses * diag.delta) == pytest.approx(0.0, abs=1e-12)


def test_lower_bound_attained_by_a_mass_preserving_map(disk):
    measured = MeasuredComplex(disk)
    diag = diagnostics(measured, PiecewiseAffineMap(3.0 * disk.vertices))
    # Uniform scaling preserves the (normalized) mass distribution exactly.
    assert abs(diag.epsilon) <= 1e-12 * diag.energy
    np.testing.assert_allclose(diag.delta, 0.0, atol=1e-12)


def test_non_preserving_map_has_positive_epsilon(disk):
    measured = MeasuredComplex(disk)
    diag = diagnostics(measured, disk_twist_map(disk, 2.0))
    assert diag.epsilon > 1e-6
    assert diag.sd_delta > 0.0


def test_negative_weight_fraction_recorded(disk):
    diag = diagnostics(MeasuredComplex(disk), _wobbled(disk, 0.05))
    assert 0.0 <= diag.negative_weight_fraction <= 1.0
    assert "negative_weight_fraction" in diag.summary()
    bare = diagnostics(MeasuredComplex(disk), _wobbled(disk, 0.05), with_weights=False)
    assert "negative_weight_fraction" not in bare.summary()


def test_unit_volumes():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)
    assert unit_sphere_area(3) == pytest.approx(4.0 * math.pi)
    assert unit_sphere_area(2) == pytest.approx(2.0 * math.pi)


def test_normalized_diagnostics_rescale_to_unit_ball(disk):
    measured = MeasuredComplex(disk)
    fmap = _wobbled(disk)
    raw = diagnostics(measured, fmap)
    normalized = normalized_diagnostics(measured, fmap)
    assert normalized.image_volumes.sum() == pytest.approx(math.pi)
    assert normalized.total_mass == pytest.approx(math.pi)
    np.testing.assert_allclose(normalized.delta, raw.delta, atol=1e-12)


def test_normalized_diagnostics_on_a_surface(ball3):
    surface = boundary_complex(ball3).complex
    normalized = normalized_diagnostics(MeasuredComplex(surface), PiecewiseAffineMap(surface.vertices))
    assert normalized.total_mass == pytest.approx(4.0 * math.pi)


def test_ratio_histogram_counts_everything():
    delta = np.array([-0.5, 0.0, 0.0, 0.999, 1.5, -1.5])
    histogram = ratio_histogram(delta, bins=4)
    assert histogram["range"] == [0.0, 2.0]
    assert len(histogram["edges"]) == 5
    assert histogram["below"] == 1
    assert histogram["above"] == 1
    assert sum(histogram["counts"]) == 4
    assert histogram["counts"][2] == 2
    with pytest.raises(ValueError):
        ratio_histogram(delta, bins=0)
    with pytest.raises(ValueError):
        ratio_histogram(delta, value_range=(1.0, 1.0))


def test_ratio_csv(tmp_path):
    path = tmp_path / "ratios.csv"
    write_ratio_csv(path, np.array([-0.25, 0.0, 0.5]))
    with path.open(newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["simplex_id", "delta_plus_1"]
    assert [float(r[1]) for r in rows[1:]] == [0.75, 1.0, 1.5]


def test_diagnostics_csv(tmp_path, disk):
    measured = MeasuredComplex(disk)
    diag = diagnostics(measured, _wobbled(disk))
    path = tmp_path / "diag.csv"
    write_diagnostics_csv(path, diag, disk.volumes)
    with path.open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert tuple(rows[0].keys()) == DIAGNOSTICS_COLUMNS
    assert len(rows) == disk.n_simplices
    assert float(rows[4]["delta"]) == diag.delta[4]


def test_summary_json_is_sorted():
    diag = diagnostics_from_volumes(np.array([0.5, 1.5]), np.array([1.0, 1.0]))
    payload = summary_json(diag, mesh="pair")
    data = json.loads(payload)
    assert data["mesh"] == "pair"
    assert list(data) == sorted(data)
