"""Experiment configuration: validation, persistence, hashing."""

import json

import pytest

from sgrl.config import ExperimentConfig


def test_default_config_validates():
    ExperimentConfig().validate()
    ExperimentConfig.smoke().validate()


def test_validation_collects_all_violations():
    cfg = ExperimentConfig(runs=0, epochs=-3, train_frac=1.5)
    with pytest.raises(ValueError) as err:
        cfg.validate()
    msg = str(err.value)
    assert "runs" in msg and "epochs" in msg and "train_frac" in msg


def test_json_round_trip(tmp_path):
    cfg = ExperimentConfig(epochs=12, latent_slots=3)
    path = tmp_path / "config.json"
    cfg.save(path)
    again = ExperimentConfig.load(path)
    assert again == cfg


def test_load_rejects_unknown_keys(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"epochs": 5, "no_such_field": 1}))
    with pytest.raises(ValueError):
        ExperimentConfig.load(path)


def test_overrides():
    cfg = ExperimentConfig()
    out = cfg.with_overrides({"epochs": 9, "threshold": 0.4})
    assert out.epochs == 9
    assert out.threshold == 0.4
    assert cfg.epochs != 9 or cfg.epochs == ExperimentConfig().epochs
    with pytest.raises(ValueError):
        cfg.with_overrides({"bogus": 1})


def test_hash_tracks_content():
    a = ExperimentConfig()
    b = ExperimentConfig()
    assert a.config_hash() == b.config_hash()
    c = ExperimentConfig(master_seed=999)
    assert c.config_hash() != a.config_hash()
    assert len(a.config_hash()) == 12


def test_train_settings_mapping():
    cfg = ExperimentConfig(epochs=17, q_hidden=24, eps_end=0.07)
    s = cfg.train_settings()
    assert s.epochs == 17
    assert s.q_hidden == 24
    assert s.eps_end == 0.07
    assert s.eval_episodes == cfg.curve_episodes
