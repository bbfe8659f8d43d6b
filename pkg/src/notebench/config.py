"""Run configuration: flags take precedence over the config file, which
takes precedence over environment variables.  Credentials are never part
of the config; provider and backend blocks name the environment variable
that holds them."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError
from .judge.prompts import PRIMARY_KINDS, PromptKind

_ENV_PREFIX = "NOTEBENCH_"

DEFAULT_PROVIDERS = [{"provider_id": "hash-16", "kind": "hash", "dim": 16}]


@dataclass
class RunConfig:
    corpus: str = ""
    out: str = ""
    backend: str = "scripted"
    model: str = "scripted"
    runs: int = 3
    seed: int = 0
    parallelism: int = 1
    prompts: tuple[PromptKind, ...] = PRIMARY_KINDS
    providers: list[dict] = field(default_factory=lambda: list(DEFAULT_PROVIDERS))
    scripted_rules: str = ""
    http_endpoint: str = ""
    http_credential_env: str = ""
    http_timeout_s: float = 60.0
    host: str = "127.0.0.1"
    port: int = 8321

    def validate(self) -> None:
        if not self.corpus:
            raise ConfigError("corpus path is required")
        if not self.out:
            raise ConfigError("output directory is required")
        if self.runs < 1 or self.runs % 2 == 0:
            raise ConfigError(f"consensus runs must be odd and >= 1, got {self.runs}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.backend not in ("http", "scripted"):
            raise ConfigError(f"backend must be http or scripted, got {self.backend!r}")
        if self.backend == "scripted" and not self.scripted_rules:
            raise ConfigError("scripted backend needs a rules file (scripted_rules)")
        if self.backend == "http" and not self.http_endpoint:
            raise ConfigError("http backend needs an endpoint")
        if not self.prompts:
            raise ConfigError("at least one prompt kind must be enabled")

    def manifest(self) -> dict[str, Any]:
        """Everything needed to reproduce the run; no secrets."""
        from . import __version__

        return {
            "version": __version__,
            "corpus": self.corpus,
            "backend": self.backend,
            "model": self.model,
            "runs": self.runs,
            "seed": self.seed,
            "parallelism": self.parallelism,
            "prompts": [k.value for k in self.prompts],
            "providers": self.providers,
            "scripted_rules": self.scripted_rules,
            "http_endpoint": self.http_endpoint,
            "http_credential_env": self.http_credential_env,
        }


def _parse_prompts(raw: Any) -> tuple[PromptKind, ...]:
    if isinstance(raw, str):
        names = [part.strip() for part in raw.split(",") if part.strip()]
    else:
        names = list(raw)
    kinds = []
    for name in names:
        try:
            kinds.append(PromptKind(name))
        except ValueError:
            valid = ", ".join(k.value for k in PromptKind)
            raise ConfigError(f"unknown prompt kind {name!r}; valid kinds: {valid}")
    return tuple(kinds)


def _from_env() -> dict[str, Any]:
    values: dict[str, Any] = {}
    mapping = {
        "CORPUS": "corpus",
        "OUT": "out",
        "BACKEND": "backend",
        "MODEL": "model",
        "RUNS": "runs",
        "SEED": "seed",
        "PARALLELISM": "parallelism",
        "PROMPTS": "prompts",
        "SCRIPTED_RULES": "scripted_rules",
        "HTTP_ENDPOINT": "http_endpoint",
    }
    for env_key, field_name in mapping.items():
        raw = os.environ.get(_ENV_PREFIX + env_key)
        if raw is not None:
            values[field_name] = raw
    return values


def _from_file(path: str | Path) -> dict[str, Any]:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    values = dict(data)
    http_block = values.pop("http", None)
    if isinstance(http_block, Mapping):
        values.setdefault("http_endpoint", http_block.get("endpoint", ""))
        values.setdefault("http_credential_env", http_block.get("credential_env", ""))
        if "timeout_s" in http_block:
            values.setdefault("http_timeout_s", http_block["timeout_s"])
    return values


def build_config(
    flags: Mapping[str, Any] | None = None,
    config_file: str | Path | None = None,
) -> RunConfig:
    """Merge defaults <- environment <- config file <- CLI flags."""
    merged: dict[str, Any] = {}
    merged.update(_from_env())
    if config_file:
        merged.update({k: v for k, v in _from_file(config_file).items() if v is not None})
    if flags:
        merged.update({k: v for k, v in flags.items() if v is not None})

    known = set(RunConfig.__dataclass_fields__)
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    if "prompts" in merged:
        merged["prompts"] = _parse_prompts(merged["prompts"])
    for int_field in ("runs", "seed", "parallelism", "port"):
        if int_field in merged:
            try:
                merged[int_field] = int(merged[int_field])
            except (TypeError, ValueError):
                raise ConfigError(f"{int_field} must be an integer")
    if "http_timeout_s" in merged:
        merged["http_timeout_s"] = float(merged["http_timeout_s"])
    if "providers" in merged and not isinstance(merged["providers"], list):
        raise ConfigError("providers must be a list of provider blocks")

    return RunConfig(**merged)
