"""Flat key-value configuration: defaults, optional JSON file, AGRO_ env overrides."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields

from .errors import FormatError


@dataclass
class Config:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8765
    data_dir: str = "./data"
    model_path: str = ""
    model_input_size: int = 224
    loess_span: float = 0.75
    loess_degree: int = 2
    sweep_interval: float = 1.0
    fsync: bool = False
    scrypt_log_n: int = 14
    request_cap: int = 100000


def _coerce(kind, value):
    if kind is bool:
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ("1", "true", "yes", "on")
    return kind(value)


def load_config(path: str = None, env=None) -> Config:
    """Defaults, then the JSON file at path (flat object), then AGRO_* vars.

    Environment keys are the field names upper-cased: AGRO_LISTEN_PORT,
    AGRO_DATA_DIR, and so on.
    """
    env = os.environ if env is None else env
    values = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            try:
                loaded = json.load(fh)
            except ValueError as exc:
                raise FormatError(f"config file {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise FormatError(f"config file {path}: expected a flat JSON object")
        values.update(loaded)
    cfg = Config()
    for field in fields(Config):
        kind = type(getattr(cfg, field.name))
        if field.name in values:
            setattr(cfg, field.name, _coerce(kind, values[field.name]))
        env_key = f"AGRO_{field.name.upper()}"
        if env_key in env:
            setattr(cfg, field.name, _coerce(kind, env[env_key]))
    unknown = set(values) - {f.name for f in fields(Config)}
    if unknown:
        raise FormatError(f"config file {path}: unknown keys {sorted(unknown)}")
    return cfg
