"""Experiment configuration: one JSON document, one section per module."""
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .combiner import DesignConfig
from .errors import ConfigError
from .simulator import SimulationConfig

EDGE_PATTERNS = ("kernel", "complete", "empty")


def _check_keys(cls, data, section):
    if not isinstance(data, dict):
        raise ValueError(f"section '{section}' must be an object")
    unknown = set(data) - {f.name for f in fields(cls)}
    if unknown:
        raise ValueError(f"unknown {section} keys: {sorted(unknown)}")


@dataclass(frozen=True)
class GraphConfig:
    n: int = 50
    sigma: float = 0.12
    kappa: float = 0.33
    # communication pattern; the Laplacian always uses the kernel weights
    edge_pattern: str = "kernel"
    topology_path: Optional[str] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"graph needs at least 2 nodes, got {self.n}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 < self.kappa <= np.sqrt(2):
            raise ValueError(f"kappa must lie in (0, sqrt(2)], got {self.kappa}")
        if self.edge_pattern not in EDGE_PATTERNS:
            raise ValueError(f"edge_pattern must be one of {EDGE_PATTERNS}, got {self.edge_pattern!r}")


@dataclass(frozen=True)
class SubspaceConfig:
    p: int = 4
    block_size: int = 5
    tau: float = 30.0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be positive, got {self.p}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be positive, got {self.block_size}")
        if self.tau < 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphConfig = field(default_factory=GraphConfig)
    subspace: SubspaceConfig = field(default_factory=SubspaceConfig)
    design: DesignConfig = field(default_factory=DesignConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    master_seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if self.subspace.p > self.graph.n:
            raise ValueError(f"p={self.subspace.p} exceeds the number of nodes {self.graph.n}")
        ranks = self.simulation.subspace_ranks or ()
        if any(not 1 <= p <= self.graph.n for p in ranks):
            raise ValueError(f"subspace_ranks must lie in [1, {self.graph.n}], got {ranks}")
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be nonnegative, got {self.master_seed}")

    def to_dict(self):
        return {
            "graph": {f.name: getattr(self.graph, f.name) for f in fields(GraphConfig)},
            "subspace": {f.name: getattr(self.subspace, f.name) for f in fields(SubspaceConfig)},
            "design": self.design.to_dict(),
            "simulation": self.simulation.to_dict(),
            "master_seed": self.master_seed,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            _check_keys(cls, data, "top-level")
            graph = data.get("graph", {})
            subspace = data.get("subspace", {})
            _check_keys(GraphConfig, graph, "graph")
            _check_keys(SubspaceConfig, subspace, "subspace")
            return cls(
                graph=GraphConfig(**graph),
                subspace=SubspaceConfig(**subspace),
                design=DesignConfig.from_dict(data.get("design", {})),
                simulation=SimulationConfig.from_dict(data.get("simulation", {})),
                master_seed=int(data.get("master_seed", 0)),
                output_dir=str(data.get("output_dir", "out")),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc

    def with_overrides(self, seed=None, output_dir=None, threads=None):
        cfg = self
        if seed is not None:
            cfg = replace(cfg, master_seed=seed)
        if output_dir is not None:
            cfg = replace(cfg, output_dir=str(output_dir))
        if threads is not None:
            cfg = replace(cfg, simulation=replace(cfg.simulation, threads=threads))
        return cfg

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def load_config(path):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)
