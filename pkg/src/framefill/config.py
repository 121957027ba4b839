"""Layered configuration: defaults < TOML file < FRAMEFILL_* environment
variables < explicit overrides (CLI flags)."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "FRAMEFILL_"


class ConfigError(ValueError):
    pass


@dataclass
class AppConfig:
    # artifacts (None = bundled asset)
    lexicon: str | None = None
    vocab_dir: str | None = None
    stories: str | None = None
    embeddings: str | None = None
    ngram: str | None = None
    # decode
    beam_size: int = 20
    max_new_tokens: int = 48
    num_candidates: int = 5
    length_penalty: float = 0.0
    ngram_order: int = 3
    discount: float = 0.75
    # service
    host: str = "127.0.0.1"
    port: int = 8000
    session_dir: str = "sessions"
    seed: int = 0


_SECTIONS = {
    "artifacts": ("lexicon", "vocab_dir", "stories", "embeddings", "ngram"),
    "decode": (
        "beam_size", "max_new_tokens", "num_candidates", "length_penalty",
        "ngram_order", "discount", "seed",
    ),
    "service": ("host", "port", "session_dir"),
}

_FIELD_TYPES = {f.name: f.type for f in fields(AppConfig)}


def _coerce(name: str, value: Any) -> Any:
    t = _FIELD_TYPES.get(name, "str")
    if value is None:
        return None
    if t == "int":
        return int(value)
    if t == "float":
        return float(value)
    return str(value) if "str" in str(t) else value


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> AppConfig:
    values: dict[str, Any] = {}
    if path is not None:
        with open(path, "rb") as f:
            try:
                data = tomllib.load(f)
            except tomllib.TOMLDecodeError as e:
                raise ConfigError(f"{path}: {e}") from e
        for section, keys in _SECTIONS.items():
            for key, val in data.get(section, {}).items():
                if key not in keys:
                    raise ConfigError(f"{path}: unknown key {section}.{key}")
                values[key] = _coerce(key, val)
    env = os.environ if env is None else env
    for section, keys in _SECTIONS.items():
        for key in keys:
            var = f"{ENV_PREFIX}{section.upper()}__{key.upper()}"
            if var in env:
                values[key] = _coerce(key, env[var])
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = _coerce(key, val)
    return AppConfig(**values)
