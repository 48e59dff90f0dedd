import json

import pytest

from flexrank.config import ConfigError, config_from_dict, load_config


def test_minimal_config_uses_reference_defaults():
    cfg = config_from_dict({"system": "ma", "algorithm": "random"})
    assert cfg.d_area == 200.0
    assert cfg.n_slots == 10
    assert cfg.n_users == 80
    assert cfg.m_ma == 16
    assert cfg.k_wav == 8 and cfg.m_pa == 2
    assert cfg.i_pos == 100
    assert cfg.gamma == 0.98 and cfg.tau_soft == 0.005
    assert cfg.batch_size == 64 and cfg.buffer_capacity == 5000
    assert cfg.d_threshold == 20.0 and cfg.theta_threshold == 0.3


def test_per_algorithm_defaults():
    ma = config_from_dict({"system": "ma", "algorithm": "gaiqn"}).resolved()
    assert ma.lr == 0.01 and ma.epsilon_decay == "linear"
    pa = config_from_dict({"system": "pa", "algorithm": "magaqn"}).resolved()
    assert pa.lr == 0.001 and pa.epsilon_decay == "exp"


def test_unknown_key_rejected_with_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "system": "ma",\n  "algorithm": "random",\n  "bogus_key": 3\n}\n')
    with pytest.raises(ConfigError, match=r"bogus_key.*line 4"):
        load_config(path)


def test_missing_required_field_named():
    with pytest.raises(ConfigError, match="algorithm"):
        config_from_dict({"system": "ma"})


def test_invalid_json_line_precise(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "system": "ma",,\n}\n')
    with pytest.raises(ConfigError, match=r":2:"):
        load_config(path)


def test_fairness_rule_enforced():
    with pytest.raises(ConfigError, match="fair"):
        config_from_dict({"system": "ma", "algorithm": "random", "m_ma": 8})
    cfg = config_from_dict({"system": "ma", "algorithm": "random",
                            "m_ma": 8, "k_wav": 4, "m_pa": 2})
    assert cfg.m_ma == 8


def test_algorithm_system_compatibility():
    with pytest.raises(ConfigError):
        config_from_dict({"system": "pa", "algorithm": "gaiqn"})
    with pytest.raises(ConfigError):
        config_from_dict({"system": "ma", "algorithm": "magaqn"})


def test_manifest_replay_unwraps_config(tmp_path):
    cfg = config_from_dict({"system": "ma", "algorithm": "random", "seed": 5}).resolved()
    manifest = {"artifact": "flexrank", "version": 1, "config": cfg.to_dict()}
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    replayed = load_config(path)
    assert replayed == cfg


def test_builders_round_trip():
    cfg = config_from_dict({"system": "pa", "algorithm": "magaqn", "n_users": 20,
                            "i_rows": 6, "i_cols": 6, "m_ma": 4, "k_wav": 2, "m_pa": 2})
    assert cfg.area().n_users == 20
    assert cfg.layout().i_pos == 36
    assert cfg.grid().n_positions == 36
    tc = cfg.train_config()
    assert tc.lr == 0.001 and tc.epsilon_decay == "exp"


def test_train_config_validation():
    from flexrank.gaiqn import TrainConfig

    with pytest.raises(ValueError):
        TrainConfig(gamma=1.0)
    with pytest.raises(ValueError):
        TrainConfig(tau_soft=0.0)
    with pytest.raises(ValueError):
        TrainConfig(epsilon_start=0.01, epsilon_end=0.5)
    with pytest.raises(ValueError):
        TrainConfig(epsilon_decay="bogus")
