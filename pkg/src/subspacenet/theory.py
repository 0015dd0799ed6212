"""Steady-state mean-square-deviation theory for the real-data case.

The long-term error model is driven by B = A (I - mu H°) and the noise term
Y = mu^2 A S A^T, with S = diag{R°_k}. Two predictions are provided: the
closed form (mu / 2N) Tr((U^T H° U)^-1 U^T S U), which does not depend on A,
and the trace series (1/N) sum_n Tr(B^n Y (B^T)^n).
"""
import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import InstabilityError, StabilityWarning, SubspaceNetError
from .subspace import spectral_radius

logger = logging.getLogger(__name__)

DB_FLOOR = -300.0
MAX_TERMS = 10**6
TAIL_TOL = 1e-9


def to_db(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(x > 0, 10*np.log10(np.where(x > 0, x, 1.0)), DB_FLOOR)
    return float(out) if out.ndim == 0 else out


def _as_array(a):
    # CombinationMatrix or plain array
    return np.asarray(getattr(a, "a", a), dtype=float)


@dataclass(frozen=True, eq=False)
class TheoryContext:
    h_o: np.ndarray
    w_o: np.ndarray
    noise_cov: np.ndarray  # N x L x L
    s: np.ndarray
    b: np.ndarray
    y: np.ndarray
    bias: np.ndarray  # col{grad J_k(w°_k)}
    mu: float
    rho_b: float


def limit_point(basis, ens):
    """W° = U (U^T H U)^-1 U^T H W*, H = diag{R_u,k}."""
    h = ens.hessian_diagonal
    u = basis.u
    uhu = u.T @ (h[:, None]*u)
    try:
        factor = linalg.cho_factor(uhu)
    except linalg.LinAlgError as exc:
        raise SubspaceNetError("U^T H U is not positive definite") from exc
    return u @ linalg.cho_solve(factor, u.T @ (h*ens.w_star))


def noise_covariance(ens, k, w_o):
    L = ens.block_size
    r_u = ens.regressor_cov(k)
    diff = ens.w_star_blocks[k] - np.asarray(w_o).reshape(ens.n_agents, L)[k]
    w_k = np.outer(diff, diff)
    return r_u @ w_k @ r_u + r_u*np.trace(r_u @ w_k) + ens.sigma2_v[k]*r_u


def gradient_noise(ens, k, w, regressors, noise):
    """Samples of s_k(w) = (u u^T - R_u)(w*_k - w) + u v, one row per (u, v) pair."""
    regressors = np.atleast_2d(regressors)
    diff = ens.w_star_blocks[k] - np.asarray(w)
    proj = regressors @ diff
    return regressors*proj[:, None] - ens.sigma2_u[k]*diff + regressors*np.asarray(noise)[:, None]


def stability_margin(b):
    return spectral_radius(b)


def build_theory(basis, ens, a, mu):
    a = _as_array(a)
    n, L = ens.n_agents, ens.block_size
    h_o = np.diag(ens.hessian_diagonal)
    w_o = limit_point(basis, ens)
    noise_cov = np.stack([noise_covariance(ens, k, w_o) for k in range(n)])
    s = linalg.block_diag(*noise_cov)
    b = a @ (np.eye(n*L) - mu*h_o)
    y = mu**2*(a @ s @ a.T)
    bias = h_o @ (w_o - ens.w_star)
    rho = stability_margin(b)
    if rho >= 1:
        msg = f"rho(B) = {rho:.6f} >= 1 for mu = {mu}; the long-term model is unstable"
        logger.warning(msg)
        warnings.warn(msg, StabilityWarning, stacklevel=2)
    return TheoryContext(h_o, w_o, noise_cov, s, b, y, bias, float(mu), rho)


def msd_closed_form_linear(basis, h_o, s, mu, n):
    u = basis.u
    uhu = u.T @ h_o @ u
    usu = u.T @ s @ u
    return float(mu/(2*n)*np.trace(linalg.solve(uhu, usu, assume_a="pos")))


def msd_closed_form(basis, h_o, s, mu, n):
    return to_db(msd_closed_form_linear(basis, h_o, s, mu, n))


@dataclass(frozen=True)
class SeriesResult:
    msd: float
    msd_db: float
    n_terms: int
    tail_bound: float
    rho_b: float

    def to_dict(self):
        return {"msd_series_db": self.msd_db, "rho_B": self.rho_b,
                "tail_bound": self.tail_bound, "n_terms": self.n_terms}


def series_partial_sums(b, y, n_terms):
    """Partial sums of Tr(B^n Y (B^T)^n), n = 0..n_terms-1, term by term."""
    x = np.array(y, dtype=float)
    out = np.empty(n_terms)
    total = 0.0
    for i in range(n_terms):
        total += np.trace(x)
        out[i] = total
        x = b @ x @ b.T
    return out


def msd_series(a, h_o, s, mu, n, tail_tol=TAIL_TOL, max_terms=MAX_TERMS):
    """(1/N) sum_n Tr(B^n Y (B^T)^n), summed by doubling.

    After m terms, S_2m = S_m + B^m S_m (B^m)^T. Summation stops when the
    relative increment or the geometric tail bound t_m / (1 - rho^2), t_m the
    first omitted term, drops below tail_tol, or after max_terms terms.
    """
    a = _as_array(a)
    h_o = np.asarray(h_o, dtype=float)
    b = a @ (np.eye(a.shape[0]) - mu*h_o)
    y = mu**2*(a @ np.asarray(s) @ a.T)
    rho = stability_margin(b)
    if rho >= 1:
        raise InstabilityError(f"rho(B) = {rho:.6f} >= 1 for mu = {mu}", rho)

    acc = np.array(y)
    total = float(np.trace(acc))
    if total <= 0:
        return SeriesResult(0.0, DB_FLOOR, 1, 0.0, rho)
    power = b  # B^m with m = n_terms
    m = 1
    tail = np.inf
    while m < max_terms:
        increment = power @ acc @ power.T
        inc = float(np.trace(increment))
        acc = acc + increment
        total += inc
        power = power @ power
        m *= 2
        # first omitted term t_m = Tr(B^m Y (B^m)^T)
        next_term = float(np.trace(power @ y @ power.T))
        tail = next_term/(1 - rho**2) if rho < 1 else np.inf
        if inc <= tail_tol*total or tail <= tail_tol*total:
            break
    else:
        logger.warning("trace series truncated at %d terms (tail bound %.3e)", m, tail)

    msd = total/n
    return SeriesResult(msd, to_db(msd), m, tail/n, rho)


def bias_floor_db(w_star, w_o, n):
    diff = np.asarray(w_star) - np.asarray(w_o)
    return to_db(diff @ diff/n)
