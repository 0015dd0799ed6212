"""Combination-matrix design by Douglas-Rachford splitting.

Solves

    minimize   sum_k sum_{l not in N_k} |||A_kl|||_1 + (gamma/2) ||A||_F^2
    subject to A U = U,  A = A^T,  ||A - P_U|| <= 1 - eps

alternating the closed-form prox of the objective with the projection onto
Omega = Omega_1 & Omega_2, computed as Pi_Omega2(Pi_Omega1(.)).
"""
import csv
import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from scipy import linalg

from .errors import ConvergenceError, InfeasibleDesignError
from .subspace import TOL_EQ, check_conditions, off_neighborhood_mask, spectral_radius

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DesignConfig:
    eta: float = 0.003
    reg_gamma: float = 0.0
    eps: float = 0.01
    max_iters: int = 50000
    stop_tol: float = 1e-7
    kron_reduce: bool = True
    allow_infeasible: bool = False
    polish_every: int = 500
    polish_iters: int = 2000

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.reg_gamma < 0:
            raise ValueError(f"reg_gamma must be nonnegative, got {self.reg_gamma}")
        if not 0 < self.eps <= 1:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be positive, got {self.max_iters}")
        if not self.stop_tol > 0:
            raise ValueError(f"stop_tol must be positive, got {self.stop_tol}")
        if self.polish_every < 0:
            raise ValueError(f"polish_every must be nonnegative, got {self.polish_every}")
        if self.polish_iters < 1:
            raise ValueError(f"polish_iters must be positive, got {self.polish_iters}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown design keys: {sorted(unknown)}")
        return cls(**data)


def _block_size(a, mask):
    n = np.shape(mask)[0]
    if a.shape[0] % n:
        raise ValueError(f"matrix of size {a.shape[0]} is not a block matrix over {n} agents")
    return a.shape[0] // n


def objective_f(a, mask, gamma):
    a = np.asarray(a, dtype=float)
    off = off_neighborhood_mask(mask, _block_size(a, mask))
    return float(np.abs(a[off]).sum() + 0.5*gamma*np.sum(a*a))


def prox_f(c, eta, gamma, mask):
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    c = np.asarray(c, dtype=float)
    off = off_neighborhood_mask(mask, _block_size(c, mask))
    out = c.copy()
    # soft threshold outside the neighborhoods
    out[off] = np.sign(c[off])*np.maximum(np.abs(c[off]) - eta, 0.0)
    return out/(1.0 + eta*gamma)


def project_omega1(d, p_u):
    d = np.asarray(d, dtype=float)
    q = np.eye(d.shape[0]) - p_u
    out = q @ ((d + d.T)/2) @ q + p_u
    return (out + out.T)/2


def project_omega2(c, p_u, eps, sym_tol=1e-8):
    c = np.asarray(c, dtype=float)
    if np.max(np.abs(c - c.T), initial=0.0) > sym_tol:
        raise ValueError("projection onto the spectral ball expects a symmetric matrix")
    dev = c - p_u
    vals, vecs = linalg.eigh((dev + dev.T)/2)
    beta = np.clip(vals, -1.0 + eps, 1.0 - eps)
    return p_u + (vecs*beta) @ vecs.T


def project_omega(d, p_u, eps):
    # Pi_Omega2 only moves eigenvalues, so the result stays in Omega_1 and
    # the composition is the exact projection onto the intersection.
    return project_omega2(project_omega1(d, p_u), p_u, eps)


def omega_residual(a, p_u, eps):
    return float(linalg.norm(a - project_omega(a, p_u, eps)))


def added_edges(a, mask, tol):
    """Node pairs (k, l), k < l, outside the topology that carry block l1 mass > tol."""
    a = np.asarray(a, dtype=float)
    n = np.shape(mask)[0]
    block = _block_size(a, mask)
    mass = np.abs(a).reshape(n, block, n, block).sum(axis=(1, 3))
    off = ~np.asarray(mask, dtype=bool)
    np.fill_diagonal(off, False)
    ks, ls = np.nonzero(np.triu(off & ((mass > tol) | (mass.T > tol))))
    return [(int(k), int(l)) for k, l in zip(ks, ls)]


@dataclass(frozen=True, eq=False)
class CombinationMatrix:
    a: np.ndarray
    mask: np.ndarray
    eps: float
    certificate: object
    objective_trace: np.ndarray
    iterations: int
    graph_a: np.ndarray = None  # N x N factor when a = graph_a kron I_L

    @property
    def added_edges(self):
        return added_edges(self.a, self.mask, self.certificate.tol)

    def save(self, out_dir):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        np.savetxt(out_dir / "combination_matrix.csv", self.a, delimiter=",", fmt="%.17g")
        cert = dict(self.certificate.to_dict(), iterations=self.iterations,
                    added_edges=self.added_edges)
        (out_dir / "certificate.json").write_text(json.dumps(cert, indent=2))
        with open(out_dir / "objective_trace.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "objective"])
            for i, f in enumerate(self.objective_trace, start=1):
                writer.writerow([i, f"{f:.12g}"])


def load_matrix(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


class SupportProjector:
    """Euclidean projection onto {A = A^T, A U = U, A_ij = 0 off the support}.

    The set is affine. It contains I whenever the support holds the diagonal,
    so the KKT system is always consistent.
    """

    def __init__(self, u, support):
        u = np.asarray(u, dtype=float)
        support = np.asarray(support, dtype=bool)
        n, p = u.shape
        if support.shape != (n, n):
            raise ValueError(f"support must be {n}x{n}, got {support.shape}")
        if not np.all(np.diag(support)):
            raise ValueError("support must contain the diagonal")
        rows, cols = np.nonzero(np.triu(support | support.T))
        idx = np.arange(rows.size)
        offd = rows != cols
        # (A U)[i, c] as a linear map of the upper-triangular support entries
        k = np.zeros((n, p, rows.size))
        k[rows, :, idx] = u[cols]
        k[cols[offd], :, idx[offd]] += u[rows[offd]]
        k = k.reshape(n*p, rows.size)
        kw = k/np.where(offd, 2.0, 1.0)
        self._gain = kw.T @ linalg.pinvh(kw @ k.T)
        self._k = k
        self._target = u.ravel()
        self._rows = rows
        self._cols = cols
        self.n = n
        self.p_u = u @ u.T

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        x = (d[self._rows, self._cols] + d[self._cols, self._rows])/2
        x = x + self._gain @ (self._target - self._k @ x)
        out = np.zeros((self.n, self.n))
        out[self._rows, self._cols] = x
        out[self._cols, self._rows] = x
        return out


def polish(a, onto_support, eps, max_iters=2000, tol=TOL_EQ):
    """Alternating projections between the sparse affine set and the spectral ball.

    Returns a matrix supported on the neighborhoods with AU = U, A = A^T and
    rho(A - P_U) <= 1 - eps + tol/10, or None if max_iters runs out.
    """
    p_u = onto_support.p_u
    # clip inside the ball, exit on the true radius
    target = min(1.0, 1.1*eps)
    x = onto_support(a)
    for _ in range(max_iters):
        if spectral_radius(x - p_u) <= 1 - eps + 0.1*tol:
            return x
        x = onto_support(project_omega2(x, p_u, target))
    return None


def douglas_rachford(basis, topo, cfg):
    mask = topo.adjacency
    L = basis.block_size
    if cfg.kron_reduce:
        # U = U_graph kron I_L: every iterate is A_N kron I_L, solve at graph level
        u = np.asarray(basis.graph_u)
        support = np.asarray(mask, dtype=bool)
        scale = L
    else:
        u = np.asarray(basis.u)
        support = ~off_neighborhood_mask(mask, L)
        scale = 1
    p_u = u @ u.T
    norm_scale = np.sqrt(scale)
    onto_support = SupportProjector(u, support)

    def expand(a):
        return np.kron(a, np.eye(L)) if cfg.kron_reduce else a

    def certified(a):
        report = check_conditions(expand(a), basis, topo, cfg.eps)
        return (a, report) if report.feasible else None

    def finish(a):
        snapped = project_omega(a, p_u, cfg.eps)
        report = check_conditions(expand(snapped), basis, topo, cfg.eps)
        if report.feasible:
            return snapped, report
        polished = polish(snapped, onto_support, cfg.eps, cfg.polish_iters)
        found = certified(polished) if polished is not None else None
        return found or (snapped, report)

    c = p_u.copy()
    a_prev = None
    found = None
    trace = []
    step_res = omega_res = np.inf
    exhausted = True
    for i in range(1, cfg.max_iters + 1):
        a = prox_f(c, cfg.eta, cfg.reg_gamma, mask)
        c = c + project_omega(2*a - c, p_u, cfg.eps) - a
        trace.append(scale*objective_f(a, mask, cfg.reg_gamma))
        if a_prev is not None:
            step_res = norm_scale*linalg.norm(a - a_prev)
            if step_res <= cfg.stop_tol*max(1.0, norm_scale*linalg.norm(a)):
                omega_res = norm_scale*omega_residual(a, p_u, cfg.eps)
                if omega_res <= cfg.stop_tol:
                    exhausted = False
                    break
        if cfg.reg_gamma == 0 and cfg.polish_every and i % cfg.polish_every == 0:
            # with gamma = 0 a feasible point on the neighborhoods has f = 0 and is optimal
            polished = polish(project_omega(a, p_u, cfg.eps), onto_support, cfg.eps,
                              cfg.polish_iters)
            found = certified(polished) if polished is not None else None
            if found is not None:
                exhausted = False
                logger.info("DR stopped at iteration %d with a certified zero-cost point", i)
                break
        if i % 1000 == 0:
            logger.debug("DR iteration %d: f=%.3e step=%.3e", i, trace[-1], step_res)
        a_prev = a

    final, report = found if found is not None else finish(a)
    full = expand(final)
    graph_a = final if cfg.kron_reduce else None
    result = CombinationMatrix(full, mask, cfg.eps, report, np.array(trace), i, graph_a)
    if exhausted:
        omega_res = norm_scale*omega_residual(a, p_u, cfg.eps)
        if report.feasible and cfg.reg_gamma > 0:
            raise ConvergenceError(
                f"Douglas-Rachford did not converge in {cfg.max_iters} iterations "
                f"(step {step_res:.3e}, omega residual {omega_res:.3e}); eta may be too large",
                cfg.max_iters, step_res, omega_res)
        logger.warning("DR hit max_iters=%d (step %.3e, omega residual %.3e)",
                       cfg.max_iters, step_res, omega_res)
    else:
        logger.info("DR finished after %d iterations, f=%.3e", i, trace[-1])

    if not report.feasible and not cfg.allow_infeasible:
        edges = result.added_edges
        raise InfeasibleDesignError(
            f"designed matrix violates the topology (off-neighborhood mass "
            f"{report.sparsity_violation:.3e}, contraction {report.contraction:.6f}); "
            f"{len(edges)} edge(s) would have to be added",
            report, edges)
    return result
