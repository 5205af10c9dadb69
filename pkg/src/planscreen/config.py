"""Run configuration: defaults, strict validation, file and CLI merging.

A configuration is a plain JSON document with fixed sections. Every field
has a default; unknown fields are rejected by name and type mismatches
are reported with their JSON path. Precedence: defaults, then the config
file, then --set overrides.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .blockworld import TaskSpec
from .model import ModelDims
from .training import TrainConfig


class ConfigError(ValueError):
    pass


TASK_HORIZONS = {"stacking": 28, "replacement": 48}
TASK_SIGMAS = {"stacking": 0.005, "replacement": 0.006}
MODEL_KINDS = ("firp", "a_mlp", "a_mlp_enc", "gru", "oracle")

DEFAULTS = {
    "task": {
        "kind": "stacking",
        "n_blocks": 3,
        "horizon": 0,          # 0 resolves to the per-task default
        "sigma_plan": -1.0,    # negative resolves to the per-task default
        "hazard_rate": 0.5,
        "n_episodes": 500,
        "shuffle_order": True,
    },
    "dims": {
        "obs": 0,              # 0 resolves to 3 + 2 * n_blocks
        "feat": 32,
        "det": 64,
        "stoch": 16,
        "pool": 32,
        "n_prototypes": 4,
        "temperature": 20.0,
    },
    "train": {
        "model": "firp",
        "lr": 1e-4,
        "clip_norm": 10.0,
        "lam": 1e-2,
        "alpha": 1e-2,
        "beta": 1e-2,
        "predict_start_epoch": 1,
        "encoder_stop_epoch": 0,   # 0 means the encoder never freezes
        "epochs": 150,
        "batch_size": 16,
        "overshoot_taus": [2, 4, 8, 16],
        "val_fraction": 0.2,
        "dtype": "float32",
        "top_k": 5,
    },
    "eval": {
        "runs": 5,
        "threshold": 0.5,
    },
    "predict": {
        "episode_index": 0,
    },
    "replan": {
        "n_trials": 50,
        "max_iter": 6,
        "threshold": 0.5,
        "sigma": 0.005,
        "hazard_rate": 1.0,
    },
    "paths": {
        "dataset": "episodes.jsonl",
        "checkpoint": "",
    },
    "seeds": {
        "data": 1,
        "train": 0,
        "eval": 0,
        "replan": 0,
    },
}


def _type_name(v) -> str:
    return type(v).__name__


def _check_type(default, value, path: str):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"type mismatch at {path}: expected bool, got {_type_name(value)}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"type mismatch at {path}: expected int, got {_type_name(value)}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"type mismatch at {path}: expected number, got {_type_name(value)}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"type mismatch at {path}: expected string, got {_type_name(value)}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"type mismatch at {path}: expected list, got {_type_name(value)}")
        return value
    raise ConfigError(f"unsupported config value at {path}")


def _merge(target: dict, incoming: dict, prefix: str = "") -> None:
    for key, value in incoming.items():
        path = f"{prefix}{key}"
        if key not in target:
            raise ConfigError(f"unknown config field: {path}")
        if isinstance(target[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"type mismatch at {path}: expected object")
            _merge(target[key], value, prefix=f"{path}.")
        else:
            target[key] = _check_type(target[key], value, path)


def _apply_override(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config field: {key}")
        node = node[part]
    leaf = parts[-1]
    if leaf not in node:
        raise ConfigError(f"unknown config field: {key}")
    if isinstance(node[leaf], dict):
        raise ConfigError(f"cannot assign to section {key}")
    node[leaf] = _check_type(node[leaf], value, key)


def parse_config(path=None, overrides=(), seed=None) -> dict:
    """Defaults, then the file, then overrides; validated at every step."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        _merge(cfg, data)
    for assignment in overrides:
        _apply_override(cfg, assignment)
    if seed is not None:
        for key in cfg["seeds"]:
            cfg["seeds"][key] = int(seed)
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["task"]["kind"] not in TASK_HORIZONS:
        raise ConfigError(f"task.kind must be one of {sorted(TASK_HORIZONS)}")
    if cfg["train"]["model"] not in MODEL_KINDS:
        raise ConfigError(f"train.model must be one of {MODEL_KINDS}")
    if cfg["task"]["n_blocks"] < 1:
        raise ConfigError("task.n_blocks must be positive")


def resolve(cfg: dict) -> dict:
    """Fill the per-task defaults so the echoed config is self-contained."""
    out = copy.deepcopy(cfg)
    kind = out["task"]["kind"]
    if out["task"]["horizon"] <= 0:
        out["task"]["horizon"] = TASK_HORIZONS[kind]
    if out["task"]["sigma_plan"] < 0:
        out["task"]["sigma_plan"] = TASK_SIGMAS[kind]
    if out["dims"]["obs"] <= 0:
        out["dims"]["obs"] = 3 + 2 * out["task"]["n_blocks"]
    return out


def task_spec(cfg: dict, hazard_override=None) -> TaskSpec:
    c = cfg["task"]
    return TaskSpec(
        kind=c["kind"],
        n_blocks=c["n_blocks"],
        hazard_rate=c["hazard_rate"] if hazard_override is None else hazard_override,
    )


def model_dims(cfg: dict) -> ModelDims:
    d = cfg["dims"]
    return ModelDims(
        obs=d["obs"], feat=d["feat"], det=d["det"], stoch=d["stoch"],
        pool=d["pool"], n_prototypes=d["n_prototypes"],
        temperature=d["temperature"], action=10,
    )


def train_config(cfg: dict) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(
        dims=model_dims(cfg),
        lr=t["lr"], clip_norm=t["clip_norm"], lam=t["lam"],
        alpha=t["alpha"], beta=t["beta"],
        predict_start_epoch=t["predict_start_epoch"],
        encoder_stop_epoch=t["encoder_stop_epoch"],
        epochs=t["epochs"], batch_size=t["batch_size"],
        overshoot_taus=tuple(t["overshoot_taus"]),
        val_fraction=t["val_fraction"],
        seed=cfg["seeds"]["train"],
        dtype=t["dtype"],
    )


def echo_config(cfg: dict, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "resolved_config.json"
    with open(path, "w") as fh:
        json.dump(resolve(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
