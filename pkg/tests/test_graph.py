import numpy as np
import pytest

from conftest import path_graph
from subspacenet.errors import ConnectivityError
from subspacenet.graph import (Topology, generate_geometric, graph_fourier, kernel_weights,
                               laplacian, laplacian_eigenbasis)
from subspacenet.symbolic import exact_laplacian_spectrum


def test_kernel_weights_threshold():
    coords = np.array([[0.0, 0.0], [0.1, 0.0], [0.5, 0.0]])
    w = kernel_weights(coords, sigma=0.12, kappa=0.33)
    assert w[0, 1] == pytest.approx(np.exp(-0.1**2/(2*0.12**2)))
    assert w[0, 2] == 0.0  # beyond kappa
    assert w[1, 2] == 0.0
    assert np.all(np.diag(w) == 0)


def test_generate_geometric_connected_and_deterministic(small_topo):
    again = generate_geometric(12, 0.3, 0.5, seed=7)
    assert small_topo.is_connected()
    np.testing.assert_array_equal(small_topo.weights, again.weights)
    np.testing.assert_array_equal(small_topo.weights, small_topo.weights.T)
    assert np.all(np.diag(small_topo.weights) == 0)
    assert small_topo.coords.shape == (12, 2)


def test_generate_geometric_different_seeds():
    a = generate_geometric(12, 0.3, 0.5, seed=1)
    b = generate_geometric(12, 0.3, 0.5, seed=2)
    assert not np.array_equal(a.coords, b.coords)


@pytest.mark.parametrize("n, sigma, kappa", [(1, 0.1, 0.3), (10, 0.0, 0.3), (10, 0.1, 2.0)])
def test_generate_geometric_rejects_bad_parameters(n, sigma, kappa):
    with pytest.raises(ValueError):
        generate_geometric(n, sigma, kappa, seed=0)


def test_generate_geometric_gives_up():
    with pytest.raises(ConnectivityError):
        generate_geometric(50, 0.12, 0.01, seed=0, max_attempts=3)


def test_from_weights_validation():
    with pytest.raises(ValueError):
        Topology.from_weights(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        Topology.from_weights(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(ValueError):
        Topology.from_weights(np.ones((2, 3)))
    topo = Topology.from_weights(np.ones((3, 3)))
    assert np.all(np.diag(topo.weights) == 0)


def test_adjacency_includes_self(path3):
    expected = np.array([[1, 1, 0], [1, 1, 1], [0, 1, 1]], dtype=bool)
    np.testing.assert_array_equal(path3.adjacency, expected)
    assert [list(nb) for nb in path3.neighborhoods()] == [[0, 1], [0, 1, 2], [1, 2]]


def test_empty_graph_is_disconnected():
    assert not Topology.from_weights(np.zeros((3, 3))).is_connected()


def test_laplacian_path():
    lap = laplacian(path_graph(3))
    np.testing.assert_array_equal(lap, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    np.testing.assert_allclose(lap.sum(axis=1), 0)


def test_eigenbasis_path_matches_exact_spectrum():
    topo = path_graph(3)
    eig = laplacian_eigenbasis(topo)
    np.testing.assert_allclose(eig.eigenvalues, [0, 1, 3], atol=1e-12)
    np.testing.assert_allclose(eig.eigenvalues, exact_laplacian_spectrum(topo.weights), atol=1e-12)


def test_eigenbasis_properties(small_topo, small_eig):
    n = small_eig.n_nodes
    v = small_eig.eigenvectors
    assert np.all(np.diff(small_eig.eigenvalues) >= -1e-12)
    assert small_eig.eigenvalues[0] == pytest.approx(0, abs=1e-10)
    np.testing.assert_allclose(v.T @ v, np.eye(n), atol=1e-10)
    assert small_eig.eigenvalues.sum() == pytest.approx(np.trace(laplacian(small_topo)))
    # connected graph: v_1 is the normalized all-ones vector, with a positive sign
    np.testing.assert_allclose(v[:, 0], np.ones(n)/np.sqrt(n), atol=1e-10)
    for m in range(n):
        first = v[np.flatnonzero(np.abs(v[:, m]) > 1e-12)[0], m]
        assert first > 0


def test_topology_roundtrip(tmp_path, small_topo):
    path = tmp_path / "topology.json"
    small_topo.save(path)
    loaded = Topology.load(path)
    np.testing.assert_array_equal(loaded.weights, small_topo.weights)
    np.testing.assert_array_equal(loaded.coords, small_topo.coords)
    assert (loaded.sigma, loaded.kappa, loaded.seed) == (small_topo.sigma, small_topo.kappa,
                                                         small_topo.seed)


def test_graph_fourier_constant_signal(small_eig):
    L = 3
    coeffs = graph_fourier(small_eig, np.tile([1.0, 2.0, -1.0], small_eig.n_nodes), L)
    assert coeffs.shape == (small_eig.n_nodes, L)
    np.testing.assert_allclose(coeffs[0], np.sqrt(small_eig.n_nodes)*np.array([1.0, 2.0, -1.0]))
    np.testing.assert_allclose(coeffs[1:], 0, atol=1e-10)
