import json

import pytest

from conftest import small_config
from subspacenet.config import ExperimentConfig, load_config
from subspacenet.errors import ConfigError


def test_defaults_match_experiment_setup():
    cfg = ExperimentConfig()
    assert (cfg.graph.n, cfg.graph.sigma, cfg.graph.kappa) == (50, 0.12, 0.33)
    assert (cfg.subspace.p, cfg.subspace.block_size, cfg.subspace.tau) == (4, 5, 30.0)
    assert (cfg.design.eta, cfg.design.eps, cfg.design.reg_gamma) == (0.003, 0.01, 0.0)


def test_roundtrip(tmp_path):
    cfg = ExperimentConfig.from_dict(small_config(tmp_path, simulation={"subspace_ranks": [1, 2]}))
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    path = tmp_path / "config.json"
    cfg.save(path)
    assert load_config(path) == cfg
    assert cfg.simulation.subspace_ranks == (1, 2)


@pytest.mark.parametrize("sections", [
    {"graph": {"n": 1}},
    {"graph": {"edge_pattern": "ring"}},
    {"graph": {"radius": 0.3}},
    {"subspace": {"p": 9}},
    {"design": {"eps": 2.0}},
    {"simulation": {"mu": [-1.0]}},
    {"simulation": {"subspace_ranks": [0, 2]}},
    {"master_seed": -1},
    {"extra": 1},
])
def test_invalid_config_rejected(tmp_path, sections):
    data = small_config(tmp_path, **sections)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(data)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text(json.dumps({"graph": []}))
    with pytest.raises(ConfigError):
        load_config(bad)


def test_overrides(tmp_path):
    cfg = ExperimentConfig.from_dict(small_config(tmp_path))
    out = cfg.with_overrides(seed=42, output_dir=tmp_path / "other", threads=4)
    assert out.master_seed == 42
    assert out.output_dir == str(tmp_path / "other")
    assert out.simulation.threads == 4
    assert cfg.with_overrides() == cfg
    with pytest.raises(ValueError):
        cfg.with_overrides(threads=0)
