"""Adapt-then-combine simulation of distributed, centralized and non-cooperative LMS."""
import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from . import rng as _rng
from .datagen import draw_samples
from .errors import DivergenceError
from .subspace import off_neighborhood_mask
from .theory import to_db

logger = logging.getLogger(__name__)

DISTRIBUTED, CENTRALIZED, NONCOOPERATIVE = "distributed", "centralized", "noncooperative"
STRATEGIES = (DISTRIBUTED, CENTRALIZED, NONCOOPERATIVE)


@dataclass(frozen=True)
class SimulationConfig:
    mu: Tuple[float, ...] = (1e-3,)
    iterations: Optional[int] = None  # None: ceil(20 / mu) per step size
    n_runs: int = 200
    burn_in_fraction: float = 0.8
    strategies: Tuple[str, ...] = STRATEGIES
    runs_per_chunk: int = 25
    subspace_ranks: Optional[Tuple[int, ...]] = None
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in np.atleast_1d(self.mu)))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.subspace_ranks is not None:
            object.__setattr__(self, "subspace_ranks", tuple(int(p) for p in self.subspace_ranks))
        if not self.mu or any(m <= 0 for m in self.mu):
            raise ValueError(f"step sizes must be positive, got {self.mu}")
        if self.iterations is not None and self.iterations < 1:
            raise ValueError(f"iterations must be positive, got {self.iterations}")
        if self.n_runs < 1 or self.runs_per_chunk < 1 or self.threads < 1:
            raise ValueError("n_runs, runs_per_chunk and threads must be positive")
        if not 0 <= self.burn_in_fraction < 1:
            raise ValueError(f"burn_in_fraction must lie in [0, 1), got {self.burn_in_fraction}")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown:
            raise ValueError(f"unknown strategies: {sorted(unknown)}")

    def iterations_for(self, mu):
        if self.iterations is not None:
            return self.iterations
        return int(np.ceil(20/mu))

    def to_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["mu"] = list(self.mu)
        out["strategies"] = list(self.strategies)
        if self.subspace_ranks is not None:
            out["subspace_ranks"] = list(self.subspace_ranks)
        return out

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown simulation keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class SimState:
    estimates: np.ndarray  # col{w_k,i}
    intermediates: np.ndarray  # col{psi_k,i}
    iteration: int
    step_size: float


def initial_state(ens, mu):
    zeros = np.zeros(ens.dim)
    return SimState(zeros, zeros.copy(), 0, float(mu))


def combiner_array(a):
    """Dense combination matrix restricted to the blocks its mask allows."""
    mask = getattr(a, "mask", None)
    arr = np.asarray(getattr(a, "a", a), dtype=float)
    if mask is None:
        return arr
    return np.where(off_neighborhood_mask(mask, arr.shape[0]//len(mask)), 0.0, arr)


def _adapt(w, u, d, mu):
    # psi = w - mu * grad, grad = -u (d - u^T w)
    err = d - np.einsum("...kl,...kl->...k", u, w)
    return w + mu*u*err[..., None]


def _check_finite(w, iteration, strategy=None):
    if not np.all(np.isfinite(w)):
        raise DivergenceError(f"non-finite estimate at iteration {iteration}", iteration,
                              strategy=strategy)


def _step(state, combine, ens, gen, strategy):
    u, d = draw_samples(ens, gen)
    w = state.estimates.reshape(ens.n_agents, ens.block_size)
    with np.errstate(over="ignore", invalid="ignore"):
        psi = _adapt(w, u, d, state.step_size).ravel()
        new = combine @ psi
    _check_finite(new, state.iteration + 1, strategy)
    return SimState(new, psi, state.iteration + 1, state.step_size)


def step_distributed(state, a, ens, gen):
    return _step(state, combiner_array(a), ens, gen, DISTRIBUTED)


def step_centralized(state, p_u, ens, gen):
    return _step(state, np.asarray(p_u, dtype=float), ens, gen, CENTRALIZED)


@dataclass(frozen=True, eq=False)
class LearningCurve:
    strategy: str
    mu: float
    msd_wstar: np.ndarray  # linear, per iteration
    msd_wo: np.ndarray
    n_runs: int
    burn_in_fraction: float
    label: Optional[str] = None

    @property
    def name(self):
        return self.label or self.strategy

    @property
    def msd_wstar_db(self):
        return to_db(self.msd_wstar)

    @property
    def msd_wo_db(self):
        return to_db(self.msd_wo)

    def _tail(self, values):
        start = min(int(np.floor(self.burn_in_fraction*len(values))), len(values) - 1)
        return values[start:]

    @property
    def steady_state_db(self):
        return to_db(np.mean(self._tail(self.msd_wo)))

    @property
    def steady_state_wstar_db(self):
        return to_db(np.mean(self._tail(self.msd_wstar)))

    def to_rows(self):
        for i, (s, o) in enumerate(zip(self.msd_wstar_db, self.msd_wo_db), start=1):
            yield i, float(s), float(o)

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "msd_wstar_db", "msd_wo_db"])
            for i, s, o in self.to_rows():
                writer.writerow([i, f"{s:.12g}", f"{o:.12g}"])


def _is_identity(a):
    return a.shape[0] == a.shape[1] and np.array_equal(a, np.eye(a.shape[0]))


def graph_factor(a, block_size, atol=1e-14):
    """G with a = G kron I_L, or None when a has no such structure."""
    g = a[::block_size, ::block_size]
    if np.allclose(np.kron(g, np.eye(block_size)), a, rtol=0, atol=atol):
        return g
    return None


def _run_chunk(job):
    ens, combiners, w_o, mu, iterations, seed, chunk, first_run, n = job
    gen = _rng.make_generator(seed, _rng.MONTE_CARLO, chunk)
    N, L = ens.n_agents, ens.block_size
    w_star = ens.w_star_blocks
    targets = {name: np.asarray(w_o[name]).reshape(N, L) for name in combiners}
    identity = {name: _is_identity(a) for name, a in combiners.items()}
    factors = {name: graph_factor(a, L) for name, a in combiners.items()}
    states = {name: np.zeros((n, N, L)) for name in combiners}
    sums_star = {name: np.zeros(iterations) for name in combiners}
    sums_o = {name: np.zeros(iterations) for name in combiners}

    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(iterations):
            # common random numbers: every strategy sees the same data
            u, d = draw_samples(ens, gen, n)
            for name, a in combiners.items():
                psi = _adapt(states[name], u, d, mu)
                if identity[name]:
                    w = psi
                elif factors[name] is not None:
                    w = np.matmul(factors[name], psi)
                else:
                    w = (psi.reshape(n, N*L) @ a.T).reshape(n, N, L)
                err_o = np.sum((w - targets[name])**2, axis=(1, 2))/N
                if not np.all(np.isfinite(err_o)):
                    run = first_run + int(np.flatnonzero(~np.isfinite(err_o))[0])
                    raise DivergenceError(f"{name} run {run} diverged at iteration {i + 1}",
                                          i + 1, run, name)
                sums_o[name][i] = err_o.sum()
                sums_star[name][i] = (np.sum((w - w_star)**2, axis=(1, 2))/N).sum()
                states[name] = w
    return sums_star, sums_o


def run_monte_carlo(ens, combiners, w_o, mu, iterations, n_runs, seed, burn_in_fraction=0.8,
                    runs_per_chunk=25, threads=1, progress=False, strategy_of=None):
    """Average learning curves over n_runs independent runs.

    ``combiners`` maps a curve name to the M x M matrix applied in the combine
    step (P_U for the centralized strategy, I for the non-cooperative one).
    ``w_o`` is one limit point or a mapping from curve name to limit point.
    Runs are split into chunks of ``runs_per_chunk`` sharing one random
    stream; the result does not depend on ``threads``.
    ``strategy_of`` names the strategy behind each curve when the names are
    labels (e.g. one distributed curve per subspace rank).
    """
    combiners = {name: combiner_array(a) for name, a in combiners.items()}
    if not isinstance(w_o, dict):
        w_o = {name: w_o for name in combiners}
    jobs = []
    for chunk, first in enumerate(range(0, n_runs, runs_per_chunk)):
        n = min(runs_per_chunk, n_runs - first)
        jobs.append((ens, combiners, w_o, mu, iterations, seed, chunk, first, n))
    logger.info("Monte-Carlo: mu=%g, %d iterations, %d runs in %d chunk(s), %s",
                mu, iterations, n_runs, len(jobs), ", ".join(combiners))

    totals_star = {name: np.zeros(iterations) for name in combiners}
    totals_o = {name: np.zeros(iterations) for name in combiners}
    bar = dict(total=len(jobs), desc=f"mu={mu:g}", unit="chunk", disable=not progress)
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(tqdm(pool.map(_run_chunk, jobs), **bar))
    else:
        results = [_run_chunk(job) for job in tqdm(jobs, **bar)]
    # reduce in chunk order so sums are reproducible
    for sums_star, sums_o in results:
        for name in combiners:
            totals_star[name] += sums_star[name]
            totals_o[name] += sums_o[name]

    strategy_of = strategy_of or {}
    curves = {}
    for name in combiners:
        curves[name] = LearningCurve(strategy_of.get(name, name), float(mu), totals_star[name]/n_runs,
                                     totals_o[name]/n_runs, n_runs, burn_in_fraction, name)
        logger.info("%s: steady state %.2f dB (W°), %.2f dB (W*)", name,
                    curves[name].steady_state_db, curves[name].steady_state_wstar_db)
    return curves
