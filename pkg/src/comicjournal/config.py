"""Application configuration: JSON file plus COMICJOURNAL_* env overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .gateway import Gateway, HttpChatProvider, ProviderConfig, ScriptedMockProvider

_ENV_PREFIX = "COMICJOURNAL_"


@dataclass
class AppConfig:
    host: str = "127.0.0.1"
    port: int = 8400
    data_dir: str = "./data"
    locale: str = "en"
    provider: str = "mock"  # "mock" or "http"
    endpoint: str = ""
    model: str = ""
    api_key: str = ""
    timeout_s: float = 30.0
    max_repair_retries: int = 1
    temperature: float = 0.0
    mock_script_path: str = ""
    tts_enabled: bool = False

    def provider_config(self) -> ProviderConfig:
        return ProviderConfig(
            endpoint=self.endpoint,
            model=self.model,
            api_key=self.api_key,
            timeout_s=self.timeout_s,
            max_repair_retries=self.max_repair_retries,
            temperature=self.temperature,
        )


_FIELD_TYPES = {
    "host": str,
    "port": int,
    "data_dir": str,
    "locale": str,
    "provider": str,
    "endpoint": str,
    "model": str,
    "api_key": str,
    "timeout_s": float,
    "max_repair_retries": int,
    "temperature": float,
    "mock_script_path": str,
    "tts_enabled": bool,
}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    return kind(raw)


def load_config(
    path: str | Path | None = None, env: dict[str, str] | None = None
) -> AppConfig:
    """Build the config: defaults, then the JSON file, then env overrides."""
    values: dict = {}
    if path is not None:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(document, dict):
            raise ValueError("config file must hold a JSON object")
        for key, value in document.items():
            if key not in _FIELD_TYPES:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = value
    env = os.environ if env is None else env
    for name in _FIELD_TYPES:
        raw = env.get(_ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(name, raw)
    config = AppConfig(**values)
    if config.provider not in ("mock", "http"):
        raise ValueError(f"provider must be 'mock' or 'http', got {config.provider!r}")
    if config.provider == "http" and not config.endpoint:
        raise ValueError("http provider requires an endpoint")
    if config.provider == "mock" and not config.mock_script_path:
        raise ValueError("mock provider requires mock_script_path")
    return config


def build_gateway(config: AppConfig) -> Gateway:
    provider_config = config.provider_config()
    if config.provider == "mock":
        provider = ScriptedMockProvider.from_file(config.mock_script_path)
    else:
        provider = HttpChatProvider(provider_config)
    return Gateway(provider, provider_config)
