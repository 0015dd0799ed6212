"""Synthetic MSE network: agent statistics, smooth target signal and streaming data."""
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as _rng
from .graph import graph_fourier

SIGMA2_U_RANGE = (0.5, 2.0)
SIGMA2_V_RANGE = (0.2, 0.8)
SIGNAL_MEAN = 0.1


@dataclass(frozen=True, eq=False)
class AgentEnsemble:
    sigma2_u: np.ndarray  # R_u,k = sigma2_u[k] I_L
    sigma2_v: np.ndarray
    w_star: np.ndarray  # col{w*_1, ..., w*_N}
    block_size: int

    def __post_init__(self):
        n = len(self.sigma2_u)
        if len(self.sigma2_v) != n or len(self.w_star) != n*self.block_size:
            raise ValueError("inconsistent ensemble dimensions")
        if np.any(np.asarray(self.sigma2_u) <= 0):
            raise ValueError("regressor variances must be positive")
        if np.any(np.asarray(self.sigma2_v) < 0):
            raise ValueError("noise variances must be nonnegative")

    @property
    def n_agents(self):
        return len(self.sigma2_u)

    @property
    def dim(self):
        return self.n_agents*self.block_size

    @property
    def w_star_blocks(self):
        return np.asarray(self.w_star).reshape(self.n_agents, self.block_size)

    @property
    def hessian_diagonal(self):
        return np.repeat(np.asarray(self.sigma2_u, dtype=float), self.block_size)

    def regressor_cov(self, k):
        return self.sigma2_u[k]*np.eye(self.block_size)

    def to_dict(self):
        return {
            "block_size": self.block_size,
            "sigma2_u": np.asarray(self.sigma2_u).tolist(),
            "sigma2_v": np.asarray(self.sigma2_v).tolist(),
            "w_star": np.asarray(self.w_star).tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(np.array(data["sigma2_u"], dtype=float), np.array(data["sigma2_v"], dtype=float),
                   np.array(data["w_star"], dtype=float), int(data["block_size"]))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    def save_w_star(self, path):
        np.savetxt(path, self.w_star_blocks, delimiter=",", fmt="%.17g",
                   header=",".join(f"w{j}" for j in range(self.block_size)), comments="")


@dataclass(frozen=True)
class Sample:
    regressor: np.ndarray
    observation: float


def smooth_signal(eigenbasis, tau, block_size, seed):
    """W* = [(V exp(-tau Lambda) V^T) kron I_L] W_o, W_o ~ N(0.1 * 1, I)."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    n = eigenbasis.n_nodes
    gen = _rng.make_generator(seed, _rng.SIGNAL)
    w_o = gen.normal(SIGNAL_MEAN, 1.0, size=n*block_size)
    v = eigenbasis.eigenvectors
    diffusion = (v*np.exp(-tau*eigenbasis.eigenvalues)) @ v.T
    return (diffusion @ w_o.reshape(n, block_size)).ravel()


def sample_agent_models(n, block_size, eigenbasis, tau, seed):
    if eigenbasis.n_nodes != n:
        raise ValueError(f"eigenbasis has {eigenbasis.n_nodes} nodes, expected {n}")
    gen = _rng.make_generator(seed, _rng.AGENTS)
    sigma2_u = gen.uniform(*SIGMA2_U_RANGE, size=n)
    sigma2_v = gen.uniform(*SIGMA2_V_RANGE, size=n)
    w_star = smooth_signal(eigenbasis, tau, block_size, seed)
    return AgentEnsemble(sigma2_u, sigma2_v, w_star, block_size)


def draw_samples(ens, gen, n_runs=None):
    """One iteration of data for every agent.

    Returns regressors of shape (N, L) and observations of shape (N,), with a
    leading (n_runs,) axis when n_runs is given.
    """
    lead = () if n_runs is None else (n_runs,)
    n, L = ens.n_agents, ens.block_size
    u = gen.standard_normal(lead + (n, L))*np.sqrt(ens.sigma2_u)[:, None]
    v = gen.standard_normal(lead + (n,))*np.sqrt(ens.sigma2_v)
    d = np.einsum("...kl,kl->...k", u, ens.w_star_blocks) + v
    return u, d


def stream_sample(ens, agent, gen):
    if not 0 <= agent < ens.n_agents:
        raise ValueError(f"agent index {agent} out of range")
    u = gen.standard_normal(ens.block_size)*np.sqrt(ens.sigma2_u[agent])
    v = gen.standard_normal()*np.sqrt(ens.sigma2_v[agent])
    return Sample(u, float(u @ ens.w_star_blocks[agent] + v))


def spectral_content(eigenbasis, w_star, block_size):
    """(lambda_m, ||(v_m^T kron I_L) W*||^2 / ||W*||^2) for every graph frequency."""
    coeffs = graph_fourier(eigenbasis, w_star, block_size)
    energy = np.sum(coeffs**2, axis=1)
    return np.asarray(eigenbasis.eigenvalues), energy/np.sum(energy)
