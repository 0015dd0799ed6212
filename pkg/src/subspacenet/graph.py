"""Random geometric networks, graph Laplacian and its eigenbasis."""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import networkx as nx
import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from . import rng as _rng
from .errors import ConnectivityError
from .symbolic import eval_kernel

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 100


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Topology:
    coords: Optional[np.ndarray]
    weights: np.ndarray  # c_kl for k != l, zero diagonal
    sigma: Optional[float] = None
    kappa: Optional[float] = None
    seed: Optional[int] = None

    @classmethod
    def from_weights(cls, weights, coords=None, sigma=None, kappa=None, seed=None):
        w = np.array(weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got {w.shape}")
        if not np.allclose(w, w.T, atol=1e-12):
            raise ValueError("weights must be symmetric")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        np.fill_diagonal(w, 0.0)
        return cls(None if coords is None else _frozen(coords), _frozen(w), sigma, kappa, seed)

    @property
    def n_nodes(self):
        return self.weights.shape[0]

    @property
    def adjacency(self):
        """Neighborhood mask, k in N_k by convention."""
        mask = self.weights > 0
        np.fill_diagonal(mask, True)
        return mask

    def neighborhoods(self):
        return [np.flatnonzero(row) for row in self.adjacency]

    def to_networkx(self):
        return nx.from_numpy_array(np.asarray(self.weights))

    def is_connected(self):
        return self.n_nodes == 1 or nx.is_connected(self.to_networkx())

    def to_dict(self):
        return {
            "n_nodes": self.n_nodes,
            "coords": None if self.coords is None else self.coords.tolist(),
            "weights": self.weights.tolist(),
            "sigma": self.sigma,
            "kappa": self.kappa,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data):
        return cls.from_weights(data["weights"], data.get("coords"), data.get("sigma"),
                                data.get("kappa"), data.get("seed"))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class LaplacianEigenbasis:
    laplacian: np.ndarray
    eigenvectors: np.ndarray  # columns v_1..v_N
    eigenvalues: np.ndarray  # ascending

    @property
    def n_nodes(self):
        return self.laplacian.shape[0]


def kernel_weights(coords, sigma, kappa):
    dists = cdist(coords, coords)
    weights = np.where(dists <= kappa, eval_kernel(dists, sigma), 0.0)
    np.fill_diagonal(weights, 0.0)
    return weights


def generate_geometric(n, sigma, kappa, seed, max_attempts=MAX_ATTEMPTS):
    """Connected thresholded-Gaussian-kernel graph on n points in the unit square.

    Disconnected draws are rejected; attempt j uses seed + j * 2**20.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not 0 < kappa <= np.sqrt(2):
        raise ValueError(f"kappa must lie in (0, sqrt(2)], got {kappa}")

    for attempt in range(max_attempts):
        attempt_seed = seed + attempt*_rng.RETRY_STRIDE
        gen = _rng.make_generator(attempt_seed, _rng.GRAPH)
        coords = gen.uniform(0.0, 1.0, size=(n, 2))
        topo = Topology.from_weights(kernel_weights(coords, sigma, kappa), coords, sigma, kappa,
                                     attempt_seed)
        if topo.is_connected():
            logger.info("connected graph with %d nodes, %d edges after %d attempt(s)",
                        n, int(np.count_nonzero(topo.weights))//2, attempt + 1)
            return topo
        logger.debug("attempt %d (seed %d) disconnected", attempt, attempt_seed)

    raise ConnectivityError(
        f"no connected graph after {max_attempts} attempts (n={n}, sigma={sigma}, kappa={kappa}); "
        "parameters produce a disconnected regime")


def laplacian(topo):
    c = np.asarray(topo.weights)
    return np.diag(c.sum(axis=1)) - c


def laplacian_eigenbasis(topo):
    lap = laplacian(topo)
    vals, vecs = linalg.eigh(lap)
    # Sign convention: first nonzero coordinate of each eigenvector positive
    for m in range(vecs.shape[1]):
        nz = np.flatnonzero(np.abs(vecs[:, m]) > 1e-12)
        if nz.size and vecs[nz[0], m] < 0:
            vecs[:, m] = -vecs[:, m]
    return LaplacianEigenbasis(_frozen(lap), _frozen(vecs), _frozen(vals))


def graph_fourier(basis, signal, block_size):
    """Spectral components (v_m^T kron I_L) W as an N x L array, row m for v_m."""
    w = np.asarray(signal, dtype=float).reshape(basis.n_nodes, block_size)
    return basis.eigenvectors.T @ w
