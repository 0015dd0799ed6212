import numpy as np
import pytest

from subspacenet.config import ExperimentConfig
from subspacenet.datagen import sample_agent_models
from subspacenet.experiment import build_setup
from subspacenet.graph import Topology, generate_geometric, laplacian_eigenbasis
from subspacenet.subspace import build_subspace


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the long Monte-Carlo acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def path_graph(n, weight=1.0):
    w = np.zeros((n, n))
    idx = np.arange(n - 1)
    w[idx, idx + 1] = w[idx + 1, idx] = weight
    return Topology.from_weights(w)


def complete_graph(n):
    return Topology.from_weights(np.ones((n, n)))


def metropolis(topo):
    """Metropolis-Hastings weights, doubly stochastic on any graph."""
    adj = np.asarray(topo.weights) > 0
    deg = adj.sum(axis=1)
    n = topo.n_nodes
    a = np.zeros((n, n))
    for k in range(n):
        for l in np.flatnonzero(adj[k]):
            a[k, l] = 1.0/(1 + max(deg[k], deg[l]))
        a[k, k] = 1.0 - a[k].sum()
    return a


@pytest.fixture
def path3():
    return path_graph(3)


@pytest.fixture(scope="session")
def small_topo():
    return generate_geometric(12, 0.3, 0.5, seed=7)


@pytest.fixture(scope="session")
def small_eig(small_topo):
    return laplacian_eigenbasis(small_topo)


@pytest.fixture(scope="session")
def small_basis(small_eig):
    return build_subspace(small_eig, 2, 2)


@pytest.fixture(scope="session")
def small_ens(small_eig):
    return sample_agent_models(12, 2, small_eig, 5.0, seed=11)


@pytest.fixture(scope="session")
def default_setup():
    # N=50, L=5, p=4, tau=30, sigma=0.12, kappa=0.33
    return build_setup(ExperimentConfig())


def small_config(tmp_path, **sections):
    """Config dict for a network small enough to simulate in a test."""
    data = {
        "graph": {"n": 8, "sigma": 0.3, "kappa": 0.6, "edge_pattern": "complete"},
        "subspace": {"p": 2, "block_size": 2, "tau": 5.0},
        "design": {"stop_tol": 1e-6},
        "simulation": {"mu": [0.05], "iterations": 200, "n_runs": 4, "runs_per_chunk": 2,
                       "strategies": ["distributed", "centralized", "noncooperative"]},
        "master_seed": 5,
        "output_dir": str(tmp_path / "out"),
    }
    for name, values in sections.items():
        if isinstance(values, dict):
            data[name] = dict(data.get(name, {}), **values)
        else:
            data[name] = values
    return data
