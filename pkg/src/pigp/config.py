"""Study configuration files: loading, presets, schema validation and seeds.

A config is one JSON document validated against ``schema/config.schema.json``.
``--config`` accepts a path or the name of a bundled preset (see
:func:`preset_names`).
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ConfigError

SEED_ENV = "PIGP_SEED"
MAX_SEED = 2**64 - 1


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("pigp").joinpath("schema", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(obj, schema_name: str, what: str | None = None) -> None:
    """Raise :class:`ConfigError` if ``obj`` does not match the named schema."""
    try:
        jsonschema.validate(obj, load_schema(schema_name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{what or schema_name}: {where}: {exc.message}") from None


def preset_names() -> list[str]:
    d = resources.files("pigp").joinpath("presets")
    return sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    path = resources.files("pigp").joinpath("presets", f"{name}.json")
    if not path.is_file():
        raise ConfigError(f"no preset named {name!r}; available: {preset_names()}")
    return json.loads(path.read_text())


def load_config(ref) -> dict:
    """Read and validate a config from a file path or preset name.

    A relative ``data.path`` is resolved against the config file's folder.
    """
    p = Path(ref)
    if p.is_file():
        try:
            cfg = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: invalid JSON ({exc})") from None
        base = p.parent
    elif os.sep not in str(ref) and not str(ref).endswith(".json"):
        cfg = load_preset(str(ref))
        base = Path.cwd()
    else:
        raise ConfigError(f"config file not found: {p}")
    validate(cfg, "config", f"config {ref}")
    data = cfg["data"]
    if "path" in data:
        dp = Path(data["path"])
        if not dp.is_absolute():
            dp = base / dp
        if not dp.is_dir():
            raise ConfigError(f"data path does not exist: {dp}")
        data["path"] = str(dp)
    return cfg


def parse_seed(value, source: str) -> int:
    try:
        seed = int(str(value).strip())
    except ValueError:
        raise ConfigError(f"{source}: seed must be an integer, got {value!r}") from None
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"{source}: seed must lie in [0, 2**64 - 1], got {seed}")
    return seed


def resolve_seed(cfg: dict, cli_seed=None) -> int:
    """Seed precedence: ``--seed``, then ``PIGP_SEED``, then the config, then 0."""
    if cli_seed is not None:
        return parse_seed(cli_seed, "--seed")
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        return parse_seed(env, SEED_ENV)
    return parse_seed(cfg.get("seed", 0), "config seed")
