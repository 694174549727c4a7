import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from descent_mesh.graphs import (
    Graph,
    build_topology,
    check_assumptions,
    graph_from_edges,
    graph_from_text,
    graph_to_text,
    incidence,
    laplacian,
)

TOPOLOGIES = [("ring", 8), ("complete", 6), ("grid2d", 9), ("erdos_renyi", 12)]


def star(n):
    return graph_from_edges(n, [(0, i) for i in range(1, n)])


def test_ring_4_structure():
    g = build_topology("ring", 4)
    assert g.num_edges == 4
    assert {tuple(e) for e in g.edges} == {(0, 1), (1, 2), (2, 3), (0, 3)}
    assert_allclose(g.p, 0.25)
    assert_allclose(g.mu, 1.0)
    assert_allclose(g.tau, 1.0)
    assert_allclose(g.delta_comp, 0.0)


def test_complete_5_has_ten_uniform_edges():
    g = build_topology("complete", 5)
    assert g.num_edges == 10
    assert_allclose(g.p, 0.1)


def test_grid_3x3_has_twelve_edges():
    # 3x3 lattice: 6 horizontal + 6 vertical
    g = build_topology("grid2d", 9)
    assert g.num_edges == 12


def test_grid_rejects_non_square():
    with pytest.raises(ValueError):
        build_topology("grid2d", 8)


def test_tiny_graph_rejected():
    with pytest.raises(ValueError):
        build_topology("ring", 1)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        build_topology("torus", 9)


def test_single_edge_incidence_column():
    g = graph_from_edges(2, [(0, 1)])
    a = incidence(g).matrix
    assert_allclose(a, [[1.0], [-1.0]])


@pytest.mark.parametrize("kind,n", TOPOLOGIES)
def test_incidence_columns_sum_to_zero(kind, n):
    a = incidence(build_topology(kind, n)).matrix
    assert np.abs(a.sum(axis=0)).max() == 0.0


def test_incidence_columns_sum_zero_general_mu():
    g = build_topology("ring", 6).with_(mu=np.linspace(0.3, 2.1, 6))
    a = incidence(g).matrix
    assert np.abs(a.sum(axis=0)).max() <= 1e-14


def test_complete3_half_mu_squared_gives_half_laplacian():
    g = build_topology("complete", 3).with_(mu=np.full(3, np.sqrt(0.5)))
    a = incidence(g).matrix
    lap = np.array([[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]])
    assert_allclose(a @ a.T, 0.5 * lap, atol=1e-15)


def test_incidence_rank_is_n_minus_1():
    for kind, n in TOPOLOGIES:
        a = incidence(build_topology(kind, n)).matrix
        assert np.linalg.matrix_rank(a) == n - 1


def test_laplacian_triangle():
    lap = laplacian(build_topology("ring", 3))
    assert_allclose(lap, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


@pytest.mark.parametrize("kind,n", TOPOLOGIES)
def test_laplacian_kernel_contains_ones(kind, n):
    lap = laplacian(build_topology(kind, n))
    assert np.abs(lap @ np.ones(n)).max() == 0.0


def test_grid_corner_has_degree_two():
    lap = laplacian(build_topology("grid2d", 9))
    assert lap[0, 0] == 2.0


@pytest.mark.parametrize("kind,n", TOPOLOGIES)
def test_aat_equals_mu_squared_laplacian_for_constant_mu(kind, n):
    g = build_topology(kind, n).with_(mu=np.full_like(build_topology(kind, n).mu, 1.7))
    a = incidence(g).matrix
    assert_allclose(a @ a.T, 1.7**2 * laplacian(g), rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("kind,n", TOPOLOGIES)
def test_every_topology_is_connected(kind, n):
    g = build_topology(kind, n)
    # BFS from node 0 over the edge list
    adj = [[] for _ in range(g.n)]
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    frontier = [0]
    while frontier:
        frontier = [w for u in frontier for w in adj[u] if w not in seen and not seen.add(w)]
    assert seen == set(range(g.n))


def test_erdos_renyi_deterministic_per_seed():
    g1 = build_topology("erdos_renyi", 15, prob=0.2, seed=3)
    g2 = build_topology("erdos_renyi", 15, prob=0.2, seed=3)
    assert np.array_equal(g1.edges, g2.edges)
    g3 = build_topology("erdos_renyi", 15, prob=0.2, seed=4)
    assert not np.array_equal(g1.edges, g3.edges)


def test_self_loop_rejected():
    with pytest.raises(ValueError):
        graph_from_edges(3, [(0, 1), (1, 1), (1, 2)])


def test_duplicate_edge_rejected():
    with pytest.raises(ValueError):
        graph_from_edges(3, [(0, 1), (1, 0), (1, 2)])


def test_probability_sum_enforced():
    with pytest.raises(ValueError):
        graph_from_edges(3, [(0, 1), (1, 2)], p=[0.6, 0.5])


def test_disconnected_positive_mu_rejected():
    with pytest.raises(ValueError):
        graph_from_edges(4, [(0, 1), (1, 2), (2, 3)], mu=[1.0, 0.0, 1.0])


def test_graph_arrays_frozen():
    g = build_topology("ring", 4)
    with pytest.raises(ValueError):
        g.mu[0] = 2.0


def test_check_assumptions_complete():
    rep = check_assumptions(build_topology("complete", 6))
    assert rep.c_regularity == pytest.approx(1.0)
    # symmetric graph: every projector diagonal is (n-1)/E, so the smallest
    # c against n/E is (n-1)/n
    assert rep.c_projector == pytest.approx(5.0 / 6.0, rel=1e-9)


def test_check_assumptions_ring():
    rep = check_assumptions(build_topology("ring", 10))
    assert rep.c_regularity == pytest.approx(1.0)


def test_check_assumptions_star_degree_ratio():
    rep = check_assumptions(star(10))
    assert rep.c_regularity == pytest.approx(9.0)


def test_node_probabilities_complete():
    g = build_topology("complete", 6)
    assert_allclose(g.node_probabilities(), 2.0 / 6.0)


def test_serialization_roundtrip_defaults():
    g = build_topology("grid2d", 16)
    g2 = graph_from_text(graph_to_text(g))
    assert np.array_equal(g.edges, g2.edges)
    for name in ("mu", "p", "tau", "delta_comp"):
        assert np.array_equal(getattr(g, name), getattr(g2, name))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_serialization_roundtrip_random_attributes(seed):
    rng = np.random.default_rng(seed)
    g = build_topology("ring", 5).with_(
        mu=np.exp(rng.uniform(-8, 8, 5)),
        tau=np.exp(rng.uniform(-8, 8, 5)),
        delta_comp=rng.uniform(0, 3, 5),
    )
    g2 = graph_from_text(graph_to_text(g))
    for name in ("mu", "p", "tau", "delta_comp"):
        assert np.array_equal(getattr(g, name), getattr(g2, name)), name
