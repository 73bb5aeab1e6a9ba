"""Tests for scenario configuration validation and hashing."""

import pytest
import yaml

from dtdroc.config import (
    ConfigError, default_config, load_config, validate_config,
)


def test_defaults_validate():
    cfg = validate_config(default_config())
    assert cfg["sample_rate"] == 8000
    assert cfg.n_samples == int(cfg["duration_s"] * 8000)


def test_unknown_key_reports_path():
    raw = default_config()
    raw["filter"]["stepsiez"] = 0.5
    with pytest.raises(ConfigError, match="filter.stepsiez"):
        validate_config(raw)


def test_unknown_detector_key():
    raw = {"detectors": [{"kind": "geigel", "windoww": 3}]}
    with pytest.raises(ConfigError, match="detectors"):
        validate_config(raw)


def test_partial_override_merges():
    cfg = validate_config({"duration_s": 2.0, "far": {"talk_spurt_ms": 100.0},
                           "echo_path": {"changes": [{"at_s": 1.0, "damping": 0.1}]}})
    assert cfg["duration_s"] == 2.0
    assert cfg["far"]["talk_spurt_ms"] == 100.0
    assert cfg["far"]["pause_ms"] == default_config()["far"]["pause_ms"]


def test_change_validation():
    with pytest.raises(ConfigError, match="strictly increasing"):
        validate_config({"echo_path": {"changes": [
            {"at_s": 5.0, "damping": 0.1}, {"at_s": 5.0, "damping": 2.0}]}})
    with pytest.raises(ConfigError, match="outside the run"):
        validate_config({"duration_s": 4.0,
                         "echo_path": {"changes": [{"at_s": 9.0, "damping": 0.1}]}})
    with pytest.raises(ConfigError, match="damping"):
        validate_config({"echo_path": {"changes": [{"at_s": 1.0, "damping": 0.0}]}})


def test_detector_kind_validation():
    with pytest.raises(ConfigError, match="detector kind"):
        validate_config({"detectors": [{"kind": "wavelet"}]})
    with pytest.raises(ConfigError, match="nonempty"):
        validate_config({"detectors": []})


def test_file_source_requires_path(tmp_path):
    with pytest.raises(ConfigError, match="far.path"):
        validate_config({"far": {"kind": "file"}})
    with pytest.raises(ConfigError, match="does not exist"):
        validate_config({"far": {"kind": "file", "path": str(tmp_path / "nope.wav")}})


def test_component_seeds_derived():
    cfg = validate_config({"seed": 100})
    assert cfg["far"]["seed"] == 101
    assert cfg["near"]["seed"] == 102
    assert cfg["echo_path"]["seed"] == 103
    explicit = validate_config({"seed": 100, "far": {"seed": 7}})
    assert explicit["far"]["seed"] == 7


def test_config_hash_stable_and_sensitive():
    a = validate_config(default_config())
    b = validate_config(default_config())
    c = validate_config({"seed": 999})
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()


def test_load_config_yaml(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump({
        "duration_s": 3.0, "seed": 5,
        "echo_path": {"changes": [{"at_s": 1.0, "damping": 0.1}]}}))
    cfg = load_config(path)
    assert cfg["duration_s"] == 3.0
    assert cfg["seed"] == 5
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("a: [unclosed")
    with pytest.raises(ConfigError, match="parse error"):
        load_config(bad)
