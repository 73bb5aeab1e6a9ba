"""Scenario configuration: YAML schema, validation, defaults, hashing."""

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml


class ConfigError(ValueError):
    """Scenario configuration failed validation."""


_DEFAULTS = {
    "sample_rate": 8000,
    "duration_s": 48.0,
    "seed": 12345,
    "nfr_db": 0.0,
    "noise_db": None,
    "far": {
        "kind": "synth",
        "path": None,
        "format": "wav16-mono",
        "seed": None,
        "talk_spurt_ms": 800.0,
        "pause_ms": 1200.0,
        "ar_coeffs": [-1.7, 0.72],
    },
    "near": {
        "kind": "synth",
        "path": None,
        "format": "wav16-mono",
        "seed": None,
        "talk_spurt_ms": 900.0,
        "pause_ms": 1500.0,
        "ar_coeffs": [-1.7, 0.72],
    },
    "echo_path": {
        "kind": "synth",
        "path": None,
        "taps": 1024,
        "decay_tau": 4.0,
        "gain": 1.4,
        "seed": None,
        # both change onsets sit inside far-end pauses with speech resuming
        # roughly 0.4 s later, so short hold windows stay silent while longer
        # ones absorb active samples
        "changes": [
            {"at_s": 18.625, "damping": 0.1},
            {"at_s": 36.59, "damping": 10.0},
        ],
        "t_hold_s": 1.0,
    },
    "filter": {
        "taps": 1024,
        "stepsize": 0.5,
        "block_size": 256,
        "regularization": None,
    },
    "vad": {
        "frame_len": 80,
        "threshold_db": -40.0,
        "hangover": 240,
    },
    "detectors": [
        {"kind": "geigel", "window": 1024, "hangover": 240, "epcd": "constant", "epcd_window": 2048},
        {"kind": "xcorr", "window": 256, "hangover": 240, "epcd": "constant", "epcd_window": 2048},
    ],
    "grid": {
        "points": 256,
        "quantile_lo": 0.005,
        "quantile_hi": 0.995,
        "t2_points": None,
    },
}


@dataclass
class ScenarioConfig:
    """Validated scenario description; see default_config() for the schema."""

    data: dict

    def __getitem__(self, key):
        return self.data[key]

    @property
    def n_samples(self) -> int:
        return int(round(self.data["duration_s"] * self.data["sample_rate"]))

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.data, sort_keys=True).encode()
        ).hexdigest()[:16]


def default_config() -> dict:
    return json.loads(json.dumps(_DEFAULTS))


def _merge(defaults: dict, given: dict, path: str) -> dict:
    out = {}
    for key, default in defaults.items():
        if key in given:
            value = given[key]
            if isinstance(default, dict) and isinstance(value, dict):
                value = _merge(default, value, f"{path}{key}.")
            out[key] = value
        else:
            # deep copy so later seed filling never mutates the defaults
            out[key] = copy.deepcopy(default)
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(path + k for k in unknown)}")
    return out


def validate_config(raw: dict) -> ScenarioConfig:
    """Merge user values over defaults; unknown keys are errors."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    data = _merge(_DEFAULTS, raw, "")

    if "detectors" in raw:
        dets = raw["detectors"]
        if not isinstance(dets, list) or not dets:
            raise ConfigError("detectors must be a nonempty list")
        data["detectors"] = [
            _merge(_DEFAULTS["detectors"][0], d, "detectors[].") for d in dets
        ]
    if data["sample_rate"] <= 0:
        raise ConfigError("sample_rate must be positive")
    if data["duration_s"] <= 0:
        raise ConfigError("duration_s must be positive")
    if data["grid"]["points"] < 1:
        raise ConfigError("grid.points must be >= 1")
    n = int(round(data["duration_s"] * data["sample_rate"]))
    for side in ("far", "near"):
        src = data[side]
        if src["kind"] not in ("synth", "file"):
            raise ConfigError(f"{side}.kind must be synth or file")
        if src["kind"] == "file":
            if not src["path"]:
                raise ConfigError(f"{side}.path required for kind=file")
            if not Path(src["path"]).exists():
                raise ConfigError(f"{side}.path does not exist: {src['path']}")
    ep = data["echo_path"]
    if ep["kind"] not in ("synth", "file"):
        raise ConfigError("echo_path.kind must be synth or file")
    if ep["kind"] == "file" and (not ep["path"] or not Path(ep["path"]).exists()):
        raise ConfigError("echo_path.path missing or nonexistent for kind=file")
    last = -1.0
    for ch in ep["changes"]:
        if set(ch) != {"at_s", "damping"}:
            raise ConfigError("each change needs exactly at_s and damping")
        if not 0 <= ch["at_s"] * data["sample_rate"] < n:
            raise ConfigError(f"change at {ch['at_s']}s lies outside the run")
        if ch["at_s"] <= last:
            raise ConfigError("change times must be strictly increasing")
        if ch["damping"] <= 0:
            raise ConfigError("damping factors must be > 0")
        last = ch["at_s"]
    for det in data["detectors"]:
        if det["kind"] not in ("geigel", "xcorr"):
            raise ConfigError(f"unknown detector kind {det['kind']!r}")
        if det["epcd"] not in ("constant", "oracle", "error_corr"):
            raise ConfigError(f"unknown epcd kind {det['epcd']!r}")

    # fill derived component seeds so every stochastic piece is pinned
    base = int(data["seed"])
    for key, offset in (("far", 1), ("near", 2), ("echo_path", 3)):
        if data[key].get("seed") is None:
            data[key]["seed"] = base + offset
    return ScenarioConfig(data)


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as f:
            raw = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error: {exc}")
    return validate_config(raw or {})
