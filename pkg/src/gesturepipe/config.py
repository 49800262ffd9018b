"""Global configuration file for the CLI and the session service.

JSON with top-level keys; everything has a default so an empty file (or no
file) is valid:

    {
      "backend": "rules" | "remote",
      "endpoint": "...", "model": "...",
      "timeout_s": 30, "max_retries": 2, "backoff_base_s": 1.0,
      "min_confidence": 0.5, "window_size": 4,
      "cache_threshold": 0.98, "cache_path": null,
      "registry_path": null,
      "template_dir": null,
      "mode": "confirm" | "auto",
      "serve": {"host": "127.0.0.1", "port": 8077}
    }

The API token is read from the environment only (GESTUREPIPE_API_TOKEN).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .gateway import BackendConfig


class ConfigError(Exception):
    pass


@dataclass
class ServeConfig:
    host: str = "127.0.0.1"
    port: int = 8077


@dataclass
class AppConfig:
    backend: str = "rules"
    backend_cfg: BackendConfig = field(default_factory=BackendConfig)
    min_confidence: float = 0.5
    window_size: int = 4
    cache_threshold: float = 0.98
    cache_path: str | None = None
    registry_path: str | None = None
    template_dir: str | None = None
    mode: str = "confirm"
    serve: ServeConfig = field(default_factory=ServeConfig)


def load_config(path: str | Path | None) -> AppConfig:
    if path is None:
        return AppConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")

    cfg = AppConfig()
    try:
        cfg.backend = data.get("backend", cfg.backend)
        if cfg.backend not in ("rules", "remote"):
            raise ConfigError(f'backend must be "rules" or "remote", got {cfg.backend!r}')
        max_tokens = data.get("max_tokens", cfg.backend_cfg.max_tokens)
        cfg.backend_cfg = BackendConfig(
            endpoint=data.get("endpoint", cfg.backend_cfg.endpoint),
            model=data.get("model", cfg.backend_cfg.model),
            timeout_s=float(data.get("timeout_s", cfg.backend_cfg.timeout_s)),
            max_retries=int(data.get("max_retries", cfg.backend_cfg.max_retries)),
            backoff_base_s=float(data.get("backoff_base_s", cfg.backend_cfg.backoff_base_s)),
            temperature=float(data.get("temperature", cfg.backend_cfg.temperature)),
            max_tokens=None if max_tokens is None else int(max_tokens),
        )
        cfg.min_confidence = float(data.get("min_confidence", cfg.min_confidence))
        cfg.window_size = int(data.get("window_size", cfg.window_size))
        cfg.cache_threshold = float(data.get("cache_threshold", cfg.cache_threshold))
        cfg.cache_path = data.get("cache_path", None)
        cfg.registry_path = data.get("registry_path", None)
        cfg.template_dir = data.get("template_dir", None)
        cfg.mode = data.get("mode", cfg.mode)
        if cfg.mode not in ("confirm", "auto"):
            raise ConfigError(f'mode must be "confirm" or "auto", got {cfg.mode!r}')
        serve = data.get("serve", {})
        cfg.serve = ServeConfig(host=serve.get("host", "127.0.0.1"),
                                port=int(serve.get("port", 8077)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if not 0.0 <= cfg.min_confidence <= 1.0:
        raise ConfigError("min_confidence must be in [0,1]")
    if not 0.0 < cfg.cache_threshold <= 1.0:
        raise ConfigError("cache_threshold must be in (0,1]")
    if cfg.window_size < 1:
        raise ConfigError("window_size must be >= 1")
    return cfg
