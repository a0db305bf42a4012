"""Run configuration: defaults, presets, flat ``key = value`` files and a stable hash.

Precedence, lowest first: built-in defaults, preset, config file,
``BIGRAPH_SUM_SEED``, explicit command-line flags.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

from .rank import PRESETS

SEED_ENV = "BIGRAPH_SUM_SEED"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    preset: str = "cnndm"
    # corpus
    max_sentences: int = 50
    max_tokens: int = 512
    vocab_size: int = 50_000
    prune_frac: float = 0.10
    embeddings: Optional[str] = None
    synthetic_embeddings: Optional[int] = None
    # training
    lr: float = 5e-5
    batch_size: int = 8
    dropout: float = 0.1
    warmup_steps: int = 8000
    steps: int = 210_000
    kl_coef: Optional[float] = None
    hidden_dim: int = 128
    latent_dim: int = 75
    freeze_initializer: bool = False
    literal_objective: bool = False
    log_every: int = 50
    # ranking
    method: str = "pacsum"
    backend: str = "bigae"
    k: Optional[int] = None
    beta_sim: Optional[float] = None
    beta_far: Optional[float] = None
    # evaluation
    pairing: str = "article"
    jobs: int = 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        return config_hash(self.to_dict())

    def with_updates(self, updates: Mapping[str, Any]) -> "RunConfig":
        return dataclasses.replace(self, **coerce(updates))


_FIELDS = {f.name: f for f in fields(RunConfig)}
_DEFAULTS = RunConfig()


def config_hash(d: Mapping) -> str:
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _parse_value(name: str, raw: Any):
    default = getattr(_DEFAULTS, name)
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("none", "null", "")):
        return None
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    kind = {"seed": int, "k": int, "synthetic_embeddings": int, "kl_coef": float, "beta_sim": float,
            "beta_far": float}.get(name, type(default) if default is not None else str)
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {kind.__name__}") from None


def coerce(updates: Mapping[str, Any]) -> dict:
    out = {}
    for key, value in updates.items():
        name = key.replace("-", "_")
        if name not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        out[name] = _parse_value(name, value)
    return out


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            out.update(coerce({key: value}))
        except ConfigError as exc:
            raise ConfigError(f"{path}:{n}: {exc}") from None
    return out


def load_run_config(config_file=None, overrides: Optional[Mapping[str, Any]] = None,
                    environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    environ = os.environ if environ is None else environ
    values: dict = {}
    if config_file:
        values.update(read_config_file(config_file))
    if environ.get(SEED_ENV):
        values.update(coerce({"seed": environ[SEED_ENV]}))
    values.update(coerce({k: v for k, v in (overrides or {}).items() if v is not None}))
    cfg = dataclasses.replace(_DEFAULTS, **values)
    if cfg.preset not in PRESETS:
        raise ConfigError(f"unknown preset {cfg.preset!r}; expected one of {', '.join(PRESETS)}")
    return cfg
