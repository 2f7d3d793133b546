"""Hub configuration: one JSON file, flag overrides applied by the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path

import jsonschema

from .model import LOCAL_MANUFACTURER_ID, Manufacturer, ModelError
from .util import dec

ENV_CONFIG_VAR = "PDH_CONFIG"

DEFAULT_CRAWL_INTERVAL = 900.0  # 15 minutes; sources publish slowly
DEFAULT_STALENESS_THRESHOLD = 3
DEFAULT_UNCERTAINTY = Decimal("0.1")
DEFAULT_FETCH_TIMEOUT = 10.0

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "host": {"type": "string", "minLength": 1},
        "port": {"type": "integer", "minimum": 1, "maximum": 65535},
        "store_path": {"type": "string", "minLength": 1},
        "ui_dir": {"type": "string", "minLength": 1},
        "crawl_interval_seconds": {"type": "number"},
        "staleness_threshold": {"type": "integer"},
        "default_uncertainty": {"type": ["number", "string"]},
        "fetch_timeout_seconds": {"type": "number", "exclusiveMinimum": 0},
        "sources": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "name", "feed_url"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "name": {"type": "string", "minLength": 1},
                    "feed_url": {"type": "string", "minLength": 1},
                },
            },
        },
    },
}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class SourceConfig:
    id: str
    name: str
    feed_url: str


@dataclass(frozen=True)
class HubConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    store_path: str = "pdh-store.json"
    ui_dir: str | None = None
    sources: tuple[SourceConfig, ...] = ()
    crawl_interval: float = DEFAULT_CRAWL_INTERVAL
    staleness_threshold: int = DEFAULT_STALENESS_THRESHOLD
    default_uncertainty: Decimal = DEFAULT_UNCERTAINTY
    fetch_timeout: float = DEFAULT_FETCH_TIMEOUT

    def manufacturers(self) -> tuple[Manufacturer, ...]:
        return tuple(Manufacturer(id=s.id, name=s.name, feed_url=s.feed_url) for s in self.sources)


def load_config(path: str | Path) -> HubConfig:
    """Read and validate the hub configuration file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(payload, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {path}: {where}: {exc.message}") from exc
    return config_from_payload(payload, origin=str(path))


def config_from_payload(payload: dict, origin: str = "<config>") -> HubConfig:
    interval = float(payload.get("crawl_interval_seconds", DEFAULT_CRAWL_INTERVAL))
    if interval <= 0:
        raise ConfigError(f"{origin}: crawl_interval_seconds must be > 0")
    threshold = int(payload.get("staleness_threshold", DEFAULT_STALENESS_THRESHOLD))
    if threshold < 1:
        raise ConfigError(f"{origin}: staleness_threshold must be >= 1")
    raw_uncertainty = payload.get("default_uncertainty", DEFAULT_UNCERTAINTY)
    if isinstance(raw_uncertainty, float):
        raw_uncertainty = str(raw_uncertainty)
    uncertainty = dec(raw_uncertainty)
    if not uncertainty.is_finite() or uncertainty < 0:
        raise ConfigError(f"{origin}: default_uncertainty must be a finite fraction >= 0")

    sources = []
    seen_ids: set[str] = set()
    for row in payload.get("sources", ()):
        if row["id"] == LOCAL_MANUFACTURER_ID:
            raise ConfigError(f"{origin}: source id {LOCAL_MANUFACTURER_ID!r} is reserved")
        if row["id"] in seen_ids:
            raise ConfigError(f"{origin}: duplicate source id {row['id']!r}")
        seen_ids.add(row["id"])
        source = SourceConfig(id=row["id"], name=row["name"], feed_url=row["feed_url"])
        try:
            Manufacturer(id=source.id, name=source.name, feed_url=source.feed_url)
        except ModelError as exc:
            raise ConfigError(f"{origin}: {exc}") from exc
        sources.append(source)

    return HubConfig(
        host=payload.get("host", "127.0.0.1"),
        port=int(payload.get("port", 8080)),
        store_path=payload.get("store_path", "pdh-store.json"),
        ui_dir=payload.get("ui_dir"),
        sources=tuple(sources),
        crawl_interval=interval,
        staleness_threshold=threshold,
        default_uncertainty=uncertainty,
        fetch_timeout=float(payload.get("fetch_timeout_seconds", DEFAULT_FETCH_TIMEOUT)),
    )
