"""Subspace constraint basis U = [v_1 ... v_p] kron I_L and combination-matrix checks."""
from dataclasses import asdict, dataclass

import numpy as np
from scipy import linalg

TOL_EQ = 1e-6


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    u: np.ndarray  # M x P, semi-unitary
    graph_u: np.ndarray  # N x p
    n_agents: int
    block_size: int
    graph_rank: int

    @property
    def dim(self):
        return self.n_agents*self.block_size

    @property
    def rank(self):
        return self.graph_rank*self.block_size

    @property
    def projector(self):
        return projector(self)


def build_subspace(eigenbasis, p, block_size):
    n = eigenbasis.n_nodes
    if not 1 <= p <= n:
        raise ValueError(f"graph rank p must lie in [1, {n}], got {p}")
    if block_size < 1:
        raise ValueError(f"block size must be positive, got {block_size}")
    graph_u = np.array(eigenbasis.eigenvectors[:, :p])
    u = np.kron(graph_u, np.eye(block_size))
    u.flags.writeable = False
    graph_u.flags.writeable = False
    return SubspaceBasis(u, graph_u, n, block_size, p)


def projector(basis):
    # U is semi-unitary so (U^T U)^-1 = I
    return basis.u @ basis.u.T


def off_neighborhood_mask(mask, block_size):
    """Entries of blocks (k, l) with l not in N_k and k != l."""
    off = ~np.asarray(mask, dtype=bool)
    np.fill_diagonal(off, False)
    return np.kron(off, np.ones((block_size, block_size), dtype=bool)).astype(bool)


def spectral_radius(a, sym_tol=1e-8):
    """|lambda|_max for symmetric input, largest singular value otherwise."""
    a = np.asarray(a, dtype=float)
    if np.max(np.abs(a - a.T), initial=0.0) <= sym_tol:
        vals = linalg.eigvalsh((a + a.T)/2)
        return float(np.max(np.abs(vals)))
    return float(linalg.svdvals(a)[0])


@dataclass(frozen=True)
class FeasibilityReport:
    right_eig_residual: float
    left_eig_residual: float
    symmetry_residual: float
    contraction: float
    sparsity_violation: float
    eps: float
    tol: float
    feasible: bool

    def to_dict(self):
        return asdict(self)


def check_conditions(a, basis, topo, eps, tol=TOL_EQ):
    a = np.asarray(a, dtype=float)
    m = basis.dim
    if a.shape != (m, m):
        raise ValueError(f"combination matrix must be {m}x{m}, got {a.shape}")
    if topo.n_nodes != basis.n_agents:
        raise ValueError(f"topology has {topo.n_nodes} nodes, subspace has {basis.n_agents} agents")
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")

    u = basis.u
    right = linalg.norm(a @ u - u)
    left = linalg.norm(u.T @ a - u.T)
    sym = linalg.norm(a - a.T)
    dev = a - projector(basis)
    if sym <= tol:
        contraction = float(np.max(np.abs(linalg.eigvalsh((dev + dev.T)/2))))
    else:
        contraction = float(linalg.svdvals(dev)[0])
    off = off_neighborhood_mask(topo.adjacency, basis.block_size)
    sparsity = float(np.abs(a[off]).sum())

    feasible = (max(right, left, sym, sparsity) <= tol) and contraction <= 1 - eps + tol
    return FeasibilityReport(float(right), float(left), float(sym), contraction, sparsity,
                             float(eps), float(tol), bool(feasible))


@dataclass(frozen=True, eq=False)
class PowerDecay:
    norms: np.ndarray  # ||A^i - P_U||_2, i = 1..iterations
    rate: float  # rho(A - P_U)
    constant: float  # smallest c with norms[i-1] <= c rate^i

    @property
    def final(self):
        return float(self.norms[-1])


def power_convergence(a, basis, iterations):
    """||A^i - P_U||_2 for i = 1..iterations with the fitted geometric envelope.

    For A in Omega the norms equal rho(A - P_U)^i, so the constant is 1.
    """
    a = np.asarray(a, dtype=float)
    p_u = projector(basis)
    out = np.empty(iterations)
    power = np.eye(a.shape[0])
    for i in range(iterations):
        power = power @ a
        out[i] = linalg.norm(power - p_u, 2)

    rate = float(np.max(np.abs(linalg.eigvals(a - p_u))))
    steps = np.arange(1, iterations + 1)
    pos = out > 1e-12
    if not pos.any():
        constant = 0.0
    elif rate <= 1e-12:
        constant = np.inf
    else:
        constant = float(np.exp(np.max(np.log(out[pos]) - steps[pos]*np.log(rate))))
    return PowerDecay(out, rate, constant)
