"""Scenario configuration: schema validation, defaults and hashing."""

from __future__ import annotations

import copy
import hashlib
import json
from importlib import resources

import jsonschema

# exponent in N_m = m^a when a schedule gives only m
DEFAULT_SCHEDULE_EXPONENT = 2

class ConfigError(ValueError):
    """The configuration is malformed or violates an invariant."""


def load_schema(name: str = "config_schema.json") -> dict:
    return json.loads(resources.files(__package__).joinpath(name).read_text(encoding="utf-8"))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def schedule_values(schedule: dict) -> list:
    """Explicit ``N`` list, or ``N_m = round(m**a)`` with ``a`` defaulting to ``DEFAULT_SCHEDULE_EXPONENT``."""
    if "N" in schedule:
        Ns = [int(n) for n in schedule["N"]]
    else:
        a = schedule.get("a", DEFAULT_SCHEDULE_EXPONENT)
        Ns = [int(round(m ** a)) for m in schedule["m"]]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ConfigError(f"schedule must be strictly increasing, got {Ns}")
    return Ns


def validate(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    if "schedule" in cfg:
        schedule_values(cfg["schedule"])


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg
