import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from descent_mesh.graphs import IncidenceMatrix, build_topology, graph_from_edges, incidence
from descent_mesh.spectral import (
    compute_params,
    eigen_laplacian,
    gram_projector,
    projector_diagonals,
)


def unit_params(graph):
    ones = np.ones(graph.n)
    return compute_params(graph, ones, ones)


def test_complete3_eigenvalues():
    g = build_topology("complete", 3)
    a = incidence(g).matrix
    vals, _ = eigen_laplacian(a @ a.T)
    assert_allclose(vals, [0.0, 3.0, 3.0], atol=1e-12)


def test_ring4_eigenvalues_are_circulant():
    g = build_topology("ring", 4)
    a = incidence(g).matrix
    vals, _ = eigen_laplacian(a @ a.T)
    assert_allclose(vals, [0.0, 2.0, 2.0, 4.0], atol=1e-12)


def test_one_by_one_zero_matrix():
    vals, vecs = eigen_laplacian(np.zeros((1, 1)))
    assert_allclose(vals, [0.0])
    assert vecs.shape == (1, 1)


def test_eigen_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        eigen_laplacian(np.array([[0.0, 1.0], [0.5, 0.0]]))


def test_eigen_rejects_indefinite():
    with pytest.raises(ValueError):
        eigen_laplacian(np.array([[1.0, 0.0], [0.0, -1.0]]))


@pytest.mark.parametrize("kind,n", [("ring", 7), ("complete", 5), ("grid2d", 9)])
def test_eigen_reconstruction(kind, n):
    w = incidence(build_topology(kind, n)).matrix
    w = w @ w.T
    vals, vecs = eigen_laplacian(w)
    err = np.linalg.norm(w - (vecs * vals) @ vecs.T)
    assert err <= 1e-8 * np.linalg.norm(w)


def test_projector_diagonals_complete4():
    proj = projector_diagonals(incidence(build_topology("complete", 4)))
    assert_allclose(proj, 0.5, rtol=1e-12)


def test_projector_diagonals_tree_edges_are_one():
    path = graph_from_edges(3, [(0, 1), (1, 2)])
    proj = projector_diagonals(incidence(path))
    assert_allclose(proj, 1.0, rtol=1e-12)


def test_projector_diagonals_ring4():
    proj = projector_diagonals(incidence(build_topology("ring", 4)))
    assert_allclose(proj, 0.75, rtol=1e-12)


@pytest.mark.parametrize("kind,n", [("ring", 9), ("complete", 6), ("grid2d", 16), ("erdos_renyi", 11)])
def test_projector_diagonal_range_and_trace(kind, n):
    g = build_topology(kind, n)
    proj = projector_diagonals(incidence(g))
    assert np.all(proj > 0.0)
    assert np.all(proj <= 1.0 + 1e-12)
    assert abs(proj.sum() - (n - 1)) <= 1e-9


@pytest.mark.parametrize("kind,n", [("ring", 8), ("grid2d", 9)])
def test_gram_projector_idempotent_symmetric(kind, n):
    p = gram_projector(incidence(build_topology(kind, n)))
    assert np.linalg.norm(p @ p - p) <= 1e-9
    assert np.linalg.norm(p - p.T) <= 1e-9


def test_projector_rejects_rank_deficient_incidence():
    # two components glued into one matrix by hand
    g = build_topology("ring", 4)
    a = np.zeros((4, 2))
    a[0, 0], a[1, 0] = 1.0, -1.0
    a[2, 1], a[3, 1] = 1.0, -1.0
    with pytest.raises(ValueError):
        projector_diagonals(IncidenceMatrix(matrix=a, graph=g))


@pytest.mark.parametrize("kind,n", [("ring", 6), ("complete", 5), ("grid2d", 9)])
def test_lambda_min_plus_same_for_both_grams(kind, n):
    a = incidence(build_topology(kind, n)).matrix
    big = np.linalg.eigvalsh(a @ a.T)
    small = np.linalg.eigvalsh(a.T @ a)
    lam_a = big[big > 1e-9 * big[-1]].min()
    lam_b = small[small > 1e-9 * small[-1]].min()
    assert abs(lam_a - lam_b) <= 1e-9 * lam_a


def test_theta_quarter_on_complete5():
    g = build_topology("complete", 5)
    g = g.with_(mu=np.full(g.num_edges, np.sqrt(0.5)))
    params = unit_params(g)
    assert params.theta == pytest.approx(0.25, abs=1e-12)


def test_sigma_a_is_lambda_min_plus_for_unit_curvature():
    g = build_topology("grid2d", 9)
    params = unit_params(g)
    assert params.sigma_a == pytest.approx(params.lambda_min_plus, rel=1e-12)


def test_delta_identity():
    params = unit_params(build_topology("ring", 11))
    th = params.theta
    assert params.delta == th * (1 - th) / (1 + th)


def test_theta_squared_at_least_sigma_over_s_squared():
    for kind, n in [("ring", 9), ("grid2d", 16), ("erdos_renyi", 13)]:
        params = unit_params(build_topology(kind, n))
        assert params.theta**2 >= params.sigma_a / params.s_bound**2 - 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10.0))
def test_theta_invariant_under_mu_rescaling(scale):
    g = build_topology("grid2d", 9)
    base = unit_params(g)
    scaled = unit_params(g.with_(mu=g.mu * scale))
    assert abs(scaled.theta - base.theta) <= 1e-9


def test_theta_in_unit_interval_across_instances():
    rng = np.random.default_rng(5)
    for trial in range(10):
        g = build_topology("erdos_renyi", 12, prob=0.4, seed=trial)
        sigma = rng.uniform(0.5, 3.0, 12)
        smooth = sigma * rng.uniform(1.0, 5.0, 12)
        params = compute_params(g, sigma, smooth)
        assert 0.0 < params.theta <= 1.0


def test_compute_params_rejects_bad_curvature():
    g = build_topology("ring", 4)
    with pytest.raises(ValueError):
        compute_params(g, [1.0, 1.0, 1.0, 1.0], [1.0, 0.5, 1.0, 1.0])
    with pytest.raises(ValueError):
        compute_params(g, [0.0, 1.0, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0])


def test_dump_has_17_digit_values():
    params = unit_params(build_topology("ring", 5))
    text = params.dump()
    assert f"theta = {params.theta:.17g}" in text
    parsed = dict(
        line.split(" = ") for line in text.strip().splitlines() if not line.startswith(("proj", "eta"))
    )
    assert float(parsed["theta"]) == params.theta
    assert float(parsed["gamma"]) == params.gamma
