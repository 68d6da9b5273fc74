from __future__ import annotations

import json
from pathlib import Path

import pytest

from comicjournal.config import AppConfig, build_gateway, load_config
from comicjournal.gateway import Gateway, HttpChatProvider, ScriptedMockProvider

DATA = Path(__file__).parent / "data"


def test_defaults():
    config = load_config(env={"COMICJOURNAL_MOCK_SCRIPT_PATH": "x.json"})
    assert config.host == "127.0.0.1"
    assert config.port == 8400
    assert config.provider == "mock"
    assert config.max_repair_retries == 1
    assert config.tts_enabled is False


def test_file_then_env_precedence(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "port": 9000,
        "provider": "http",
        "endpoint": "http://file.example/v1",
        "temperature": 0.5,
    }), "utf-8")
    config = load_config(path, env={
        "COMICJOURNAL_PORT": "9100",
        "COMICJOURNAL_TTS_ENABLED": "yes",
    })
    assert config.port == 9100  # env beats file
    assert config.endpoint == "http://file.example/v1"  # file beats default
    assert config.temperature == 0.5
    assert config.tts_enabled is True


def test_unknown_file_key_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"portt": 1}', "utf-8")
    with pytest.raises(ValueError, match="unknown config key"):
        load_config(path, env={})


@pytest.mark.parametrize("raw,expected", [
    ("1", True), ("true", True), ("ON", True),
    ("0", False), ("no", False), ("Off", False),
])
def test_bool_coercion(raw, expected):
    config = load_config(env={
        "COMICJOURNAL_MOCK_SCRIPT_PATH": "x.json",
        "COMICJOURNAL_TTS_ENABLED": raw,
    })
    assert config.tts_enabled is expected


def test_bad_bool_rejected():
    with pytest.raises(ValueError, match="boolean"):
        load_config(env={
            "COMICJOURNAL_MOCK_SCRIPT_PATH": "x.json",
            "COMICJOURNAL_TTS_ENABLED": "maybe",
        })


def test_provider_validation():
    with pytest.raises(ValueError, match="provider"):
        load_config(env={"COMICJOURNAL_PROVIDER": "magic"})
    with pytest.raises(ValueError, match="endpoint"):
        load_config(env={"COMICJOURNAL_PROVIDER": "http"})
    with pytest.raises(ValueError, match="mock_script_path"):
        load_config(env={})


def test_build_gateway_mock():
    config = AppConfig(mock_script_path=str(DATA / "ethan_mock_script.json"))
    gateway = build_gateway(config)
    assert isinstance(gateway, Gateway)
    assert isinstance(gateway.provider, ScriptedMockProvider)


def test_build_gateway_http():
    config = AppConfig(
        provider="http", endpoint="http://h.example/v1", timeout_s=3.0,
        max_repair_retries=2,
    )
    gateway = build_gateway(config)
    assert isinstance(gateway.provider, HttpChatProvider)
    assert gateway.config.max_repair_retries == 2
