import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import experiment
from .combiner import load_matrix
from .config import load_config
from .errors import ConfigError, ConvergenceError, InfeasibleDesignError, SubspaceNetError
from .simulator import DISTRIBUTED
from .subspace import check_conditions
from .theory import bias_floor_db, limit_point

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2))


def _load_combination(args, setup):
    if args.matrix is None:
        return None
    try:
        a = load_matrix(args.matrix)
        report = check_conditions(a, setup.basis(), setup.comm, setup.config.design.eps)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"unusable combination matrix {args.matrix}: {exc}") from exc
    if not report.feasible:
        logger.warning("matrix %s does not satisfy the design conditions: %s", args.matrix,
                       report.to_dict())
    return a


def _diagnostic(exc):
    if isinstance(exc, InfeasibleDesignError):
        return {
            "error": str(exc),
            "certificate": exc.report.to_dict() if exc.report is not None else None,
            "added_edges": exc.added_edges,
        }
    return {
        "error": str(exc),
        "iterations": exc.iterations,
        "step_residual": exc.step_residual,
        "omega_residual": exc.omega_residual,
    }


def cmd_design(args, setup, out):
    result = experiment.design(setup)
    result.save(out)
    logger.info("design written to %s (feasible=%s, %d iterations)", out,
                result.certificate.feasible, result.iterations)


def cmd_simulate(args, setup, out):
    results = experiment.simulate(setup, _load_combination(args, setup), progress=args.progress)
    experiment.write_simulation(results, out)
    for s in (s for _, _, s in results):
        logger.info("%-18s mu=%-8g sim %.2f dB | series %.2f dB | closed %.2f dB", s["name"],
                    s["mu"], s["steady_state_db"], s["msd_series_db"], s["msd_closed_db"])


def cmd_theory(args, setup, out):
    combination = _load_combination(args, setup)
    basis = setup.basis()
    a = experiment.design(setup).a if combination is None else combination
    arm = experiment.Arm(DISTRIBUTED, DISTRIBUTED, basis, a)
    w_o = limit_point(basis, setup.ensemble)
    bias = bias_floor_db(setup.ensemble.w_star, w_o, setup.ensemble.n_agents)
    rows = [dict(mu=mu, bias_floor_db=bias, **experiment.theory_summary(setup, arm, mu))
            for mu in setup.config.simulation.mu]
    _write_json(out / "theory.json", rows)
    for row in rows:
        logger.info("mu=%-8g closed %.2f dB | series %.2f dB (rho(B)=%.6f, %d terms)", row["mu"],
                    row["msd_closed_db"], row["msd_series_db"], row["rho_B"], row["n_terms"])


def cmd_table2(args, setup, out):
    rows = experiment.table2(setup, _load_combination(args, setup), progress=args.progress)
    experiment.write_table2(rows, out)
    for row in rows:
        logger.info("mu=%-8g %-12s closed %.2f | series %.2f | sim %.2f dB", row["mu"],
                    row["solution"], row["msd_closed_db"], row["msd_series_db"],
                    row["simulation_db"])


COMMANDS = {
    "design": cmd_design,
    "simulate": cmd_simulate,
    "theory": cmd_theory,
    "table2": cmd_table2,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="subspacenet",
        description="Distributed learning over networks under graph subspace constraints")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, metavar="PATH", help="experiment JSON")
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed (overrides config)")
    parser.add_argument("--threads", type=int, metavar="N", help="Monte-Carlo worker processes")
    parser.add_argument("--matrix", metavar="PATH",
                        help="saved combination matrix CSV instead of designing one")
    parser.add_argument("--progress", action="store_true", help="show Monte-Carlo progress")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)

    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        try:
            cfg = cfg.with_overrides(seed=args.seed, output_dir=args.out, threads=args.threads)
        except ValueError as exc:
            raise ConfigError(f"invalid override: {exc}") from exc
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        setup = experiment.build_setup(cfg)
        setup.write_provenance(out)
        COMMANDS[args.command](args, setup, out)
    except (InfeasibleDesignError, ConvergenceError) as exc:
        # every command that designs a matrix leaves the same diagnostic behind
        _write_json(out / "diagnostic.json", _diagnostic(exc))
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except SubspaceNetError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    logger.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
