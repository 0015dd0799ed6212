"""Pipelines tying graph generation, design, simulation and theory together."""
import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as _rng
from .combiner import douglas_rachford
from .datagen import sample_agent_models
from .errors import ConfigError
from .graph import Topology, generate_geometric, laplacian_eigenbasis
from .simulator import CENTRALIZED, DISTRIBUTED, NONCOOPERATIVE, run_monte_carlo
from .subspace import build_subspace, projector
from .theory import build_theory, limit_point, msd_closed_form, msd_series

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ExperimentSetup:
    config: object
    topology: Topology  # kernel graph, defines the Laplacian
    comm: Topology  # communication pattern, defines the neighborhoods
    eigenbasis: object
    ensemble: object

    def basis(self, p=None):
        return build_subspace(self.eigenbasis, self.config.subspace.p if p is None else p,
                              self.config.subspace.block_size)

    def write_provenance(self, out_dir):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self.config.save(out_dir / "config.json")
        self.topology.save(out_dir / "topology.json")
        self.ensemble.save(out_dir / "ensemble.json")
        self.ensemble.save_w_star(out_dir / "w_star.csv")


def communication_topology(topo, pattern):
    if pattern == "kernel":
        return topo
    n = topo.n_nodes
    weights = np.ones((n, n)) if pattern == "complete" else np.zeros((n, n))
    return Topology.from_weights(weights, topo.coords, topo.sigma, topo.kappa, topo.seed)


def build_setup(cfg):
    g, s = cfg.graph, cfg.subspace
    if g.topology_path:
        topo = Topology.load(g.topology_path)
        if topo.n_nodes != g.n:
            raise ConfigError(f"topology file has {topo.n_nodes} nodes, config says {g.n}")
    else:
        topo = generate_geometric(g.n, g.sigma, g.kappa, _rng.derive_seed(cfg.master_seed, _rng.GRAPH))
    eigenbasis = laplacian_eigenbasis(topo)
    ens = sample_agent_models(g.n, s.block_size, eigenbasis, s.tau,
                              _rng.derive_seed(cfg.master_seed, _rng.AGENTS))
    return ExperimentSetup(cfg, topo, communication_topology(topo, g.edge_pattern), eigenbasis, ens)


def design(setup, p=None):
    return douglas_rachford(setup.basis(p), setup.comm, setup.config.design)


@dataclass(frozen=True, eq=False)
class Arm:
    """One simulated curve: a strategy, its subspace and its combine matrix."""
    name: str
    strategy: str
    basis: object
    combiner: np.ndarray

    @property
    def p(self):
        return self.basis.graph_rank


def build_arms(setup, combination=None):
    sim = setup.config.simulation
    arms = []
    if sim.subspace_ranks:
        for p in sim.subspace_ranks:
            arms.append(Arm(f"{DISTRIBUTED}_p{p}", DISTRIBUTED, setup.basis(p), design(setup, p).a))
    else:
        basis = setup.basis()
        if DISTRIBUTED in sim.strategies:
            a = design(setup).a if combination is None else np.asarray(getattr(combination, "a", combination))
            arms.append(Arm(DISTRIBUTED, DISTRIBUTED, basis, a))
        if CENTRALIZED in sim.strategies:
            arms.append(Arm(CENTRALIZED, CENTRALIZED, basis, projector(basis)))
    if NONCOOPERATIVE in sim.strategies:
        # U = I_M: every agent on its own, W° = W*
        full = setup.basis(setup.eigenbasis.n_nodes)
        arms.append(Arm(NONCOOPERATIVE, NONCOOPERATIVE, full, np.eye(full.dim)))
    return arms


def theory_summary(setup, arm, mu):
    ens = setup.ensemble
    ctx = build_theory(arm.basis, ens, arm.combiner, mu)
    series = msd_series(arm.combiner, ctx.h_o, ctx.s, mu, ens.n_agents)
    return dict(msd_closed_db=msd_closed_form(arm.basis, ctx.h_o, ctx.s, mu, ens.n_agents),
                **series.to_dict())


def simulate(setup, combination=None, arms=None, progress=False):
    """Monte-Carlo learning curves for every arm and step size.

    Returns a list of (arm, curve, summary) triples; the summary pairs the
    empirical steady state with both theoretical predictions.
    """
    cfg = setup.config
    sim = cfg.simulation
    arms = arms if arms is not None else build_arms(setup, combination)
    targets = {arm.name: limit_point(arm.basis, setup.ensemble) for arm in arms}
    results = []
    for mu in sim.mu:
        iterations = sim.iterations_for(mu)
        if iterations < 20/mu:
            logger.warning("%d iterations at mu=%g may end before steady state", iterations, mu)
        curves = run_monte_carlo(
            setup.ensemble, {arm.name: arm.combiner for arm in arms}, targets, mu, iterations,
            sim.n_runs, _rng.derive_seed(cfg.master_seed, _rng.MONTE_CARLO),
            burn_in_fraction=sim.burn_in_fraction, runs_per_chunk=sim.runs_per_chunk,
            threads=sim.threads, progress=progress,
            strategy_of={arm.name: arm.strategy for arm in arms})
        for arm in arms:
            curve = curves[arm.name]
            summary = dict(name=arm.name, strategy=arm.strategy, p=arm.p, mu=mu,
                           iterations=iterations, n_runs=sim.n_runs,
                           steady_state_db=curve.steady_state_db,
                           steady_state_wstar_db=curve.steady_state_wstar_db,
                           **theory_summary(setup, arm, mu))
            results.append((arm, curve, summary))
    return results


def curve_filename(curve):
    return f"curve_{curve.name}_mu{curve.mu:g}.csv"


def write_simulation(results, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for _, curve, _ in results:
        curve.save_csv(out_dir / curve_filename(curve))
    summary = [s for _, _, s in results]
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


TABLE2_COLUMNS = ("mu", "solution", "msd_closed_db", "msd_series_db", "simulation_db")


def table2(setup, combination=None, progress=False):
    """Closed form, series and simulated steady-state MSD for both cooperative strategies."""
    basis = setup.basis()
    a = design(setup).a if combination is None else np.asarray(getattr(combination, "a", combination))
    arms = [Arm(CENTRALIZED, CENTRALIZED, basis, projector(basis)),
            Arm(DISTRIBUTED, DISTRIBUTED, basis, a)]
    rows = []
    for _, _, s in simulate(setup, arms=arms, progress=progress):
        rows.append(dict(mu=s["mu"], solution=s["strategy"], msd_closed_db=s["msd_closed_db"],
                         msd_series_db=s["msd_series_db"], simulation_db=s["steady_state_db"]))
    return rows


def write_table2(rows, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "table2.json").write_text(json.dumps(rows, indent=2))
    with open(out_dir / "table2.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE2_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
