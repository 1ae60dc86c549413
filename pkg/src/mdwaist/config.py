"""Gateway configuration: JSON config file, defaults, env-var secret overrides."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, time
from pathlib import Path
from zoneinfo import ZoneInfo

from .provider import ProviderConfig
from .trigger import DEFAULT_KEYWORDS

ENV_LLM_API_KEY = "MDWAIST_LLM_API_KEY"
ENV_PROVIDER_TOKEN = "MDWAIST_PROVIDER_TOKEN"

STT_MODES = ("mock", "cloud")

_TIME_RE = re.compile(r"^(\d{2}):(\d{2})$")


class ConfigError(ValueError):
    """Config file is missing, malformed, or references invalid resources."""


@dataclass(frozen=True)
class LlmConfig:
    base_url: str
    api_key: str
    model_name: str
    timeout: float = 15.0


@dataclass(frozen=True)
class SttConfig:
    mode: str = "mock"
    cloud_url: str | None = None
    cloud_api_key: str | None = None
    timeout: float = 10.0

    def __post_init__(self):
        if self.mode not in STT_MODES:
            raise ConfigError(f"stt mode must be one of {STT_MODES}, got {self.mode!r}")
        if self.mode == "cloud" and not self.cloud_url:
            raise ConfigError("cloud STT mode needs stt.cloud.url")


@dataclass(frozen=True)
class GatewayConfig:
    timezone: str = "America/Phoenix"
    trigger_keywords: frozenset = DEFAULT_KEYWORDS
    default_duration_minutes: int = 30
    default_start_time: time = time(9, 0)
    llm: LlmConfig | None = None
    stt: SttConfig = field(default_factory=SttConfig)
    provider: ProviderConfig | None = None
    confirm_mode: bool = False
    pending_expiry_seconds: float = 120.0
    fixed_now: datetime | None = None
    host: str = "127.0.0.1"
    port: int = 8765
    store_path: str = "calendar_store.json"

    def __post_init__(self):
        try:
            ZoneInfo(self.timezone)
        except Exception as exc:
            raise ConfigError(f"invalid IANA timezone: {self.timezone!r}") from exc
        if not self.trigger_keywords:
            raise ConfigError("trigger_keywords must be non-empty")
        if self.default_duration_minutes < 1:
            raise ConfigError("default_duration_minutes must be positive")
        if self.fixed_now is not None and self.fixed_now.tzinfo is None:
            raise ConfigError("fixed_now must carry a UTC offset")
        parent = Path(self.store_path).resolve().parent
        if not parent.is_dir():
            raise ConfigError(f"store_path directory does not exist: {parent}")


def parse_wall_time(text: str) -> time:
    match = _TIME_RE.match(text.strip())
    if not match:
        raise ConfigError(f"expected HH:MM wall time, got {text!r}")
    hour, minute = int(match.group(1)), int(match.group(2))
    if hour > 23 or minute > 59:
        raise ConfigError(f"wall time out of range: {text!r}")
    return time(hour, minute)


def parse_instant(text: str) -> datetime:
    """ISO-8601 instant with offset ('Z' accepted)."""
    try:
        value = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ConfigError(f"invalid ISO-8601 instant: {text!r}") from exc
    if value.tzinfo is None:
        raise ConfigError(f"instant must carry a UTC offset: {text!r}")
    return value


def _llm_from_dict(data: dict) -> LlmConfig:
    try:
        return LlmConfig(
            base_url=data["base_url"],
            api_key=data.get("api_key", ""),
            model_name=data["model_name"],
            timeout=float(data.get("timeout", 15.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"llm config missing key: {exc}") from exc


def _stt_from_dict(data: dict) -> SttConfig:
    cloud = data.get("cloud") or {}
    return SttConfig(
        mode=data.get("mode", "mock"),
        cloud_url=cloud.get("url"),
        cloud_api_key=cloud.get("api_key"),
        timeout=float(cloud.get("timeout", 10.0)),
    )


def _provider_from_dict(data: dict) -> ProviderConfig:
    try:
        return ProviderConfig(
            base_url=data["base_url"],
            calendar_id=data["calendar_id"],
            auth_token=data.get("auth_token", ""),
            timeout=float(data.get("timeout", 10.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"provider config missing key: {exc}") from exc


def load_config(path: str | Path, env: dict | None = None) -> GatewayConfig:
    """Load a JSON config file and apply environment-variable secret overrides."""
    env = os.environ if env is None else env
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")

    listen = data.get("listen") or {}
    config = GatewayConfig(
        timezone=data.get("timezone", "America/Phoenix"),
        trigger_keywords=frozenset(
            k.lower() for k in data.get("trigger_keywords", sorted(DEFAULT_KEYWORDS))
        ),
        default_duration_minutes=int(data.get("default_duration_minutes", 30)),
        default_start_time=parse_wall_time(data.get("default_start_time", "09:00")),
        llm=_llm_from_dict(data["llm"]) if data.get("llm") else None,
        stt=_stt_from_dict(data.get("stt") or {}),
        provider=_provider_from_dict(data["provider"]) if data.get("provider") else None,
        confirm_mode=bool(data.get("confirm_mode", False)),
        pending_expiry_seconds=float(data.get("pending_expiry_seconds", 120.0)),
        fixed_now=parse_instant(data["fixed_now"]) if data.get("fixed_now") else None,
        host=listen.get("host", "127.0.0.1"),
        port=int(listen.get("port", 8765)),
        store_path=data.get("store_path", "calendar_store.json"),
    )
    return apply_env_overrides(config, env)


def apply_env_overrides(config: GatewayConfig, env) -> GatewayConfig:
    llm_key = env.get(ENV_LLM_API_KEY)
    if llm_key and config.llm is not None:
        config = replace(config, llm=replace(config.llm, api_key=llm_key))
    provider_token = env.get(ENV_PROVIDER_TOKEN)
    if provider_token and config.provider is not None:
        config = replace(config, provider=replace(config.provider, auth_token=provider_token))
    return config
