"""Feed crawler: fetch each manufacturer's JSON feed, normalize, upsert.

One generic crawler serves every source because all manufacturers share the
same feed format. Failure handling is soft: fetch problems mark the source
(driving staleness), vocabulary problems skip single records, and everything
is reported rather than raised, so one broken vendor never stops a sync
cycle.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Callable, Sequence

import jsonschema
import requests

from .model import Manufacturer, Product
from .store import Store, UpsertOutcome
from .util import format_ts, utc_now
from .vocab import NormalizationError, RawRecord, VocabularyRegistry, default_registry

logger = logging.getLogger(__name__)

FEED_SCHEMA_ID = "pdh-feed/1"

DEFAULT_FETCH_TIMEOUT = 10.0

FEED_SCHEMA = {
    "type": "object",
    "required": ["schema", "manufacturer", "products"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": FEED_SCHEMA_ID},
        "manufacturer": {
            "type": "object",
            "required": ["id", "name"],
            "additionalProperties": False,
            "properties": {
                "id": {"type": "string", "minLength": 1},
                "name": {"type": "string", "minLength": 1},
            },
        },
        "products": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["sku", "name", "category", "parameters"],
                "additionalProperties": False,
                "properties": {
                    "sku": {"type": "string", "minLength": 1},
                    "name": {"type": "string", "minLength": 1},
                    "category": {"type": "string"},
                    "parameters": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["name", "value"],
                            "additionalProperties": False,
                            "properties": {
                                "name": {"type": "string", "minLength": 1},
                                "value": {"type": "string"},
                                "unit": {"type": "string", "minLength": 1},
                            },
                        },
                    },
                },
            },
        },
    },
}


class FeedHTTPError(Exception):
    """Network-level failure: timeout, connection refused, non-success status."""


class FeedFormatError(Exception):
    """The source answered, but not with a valid feed document."""


@dataclass(frozen=True)
class FeedProduct:
    sku: str
    name: str
    category: str
    records: tuple[RawRecord, ...]


@dataclass(frozen=True)
class FeedDocument:
    manufacturer_id: str
    manufacturer_name: str
    products: tuple[FeedProduct, ...]


class CrawlOutcome(str, Enum):
    OK = "ok"
    HTTP_ERROR = "http_error"
    PARSE_ERROR = "parse_error"
    VOCAB_ERRORS = "vocab_errors"


@dataclass(frozen=True)
class RecordError:
    sku: str
    raw_name: str
    reason: str


@dataclass(frozen=True)
class CrawlReport:
    source_id: str
    fetched_at: datetime
    outcome: CrawlOutcome
    inserted: int = 0
    updated: int = 0
    unchanged: int = 0
    skipped_records: int = 0
    errors: tuple[RecordError, ...] = ()
    detail: str | None = None

    def to_dict(self) -> dict:
        out: dict = {
            "source_id": self.source_id,
            "fetched_at": format_ts(self.fetched_at),
            "outcome": self.outcome.value,
            "counts": {
                "inserted": self.inserted,
                "updated": self.updated,
                "unchanged": self.unchanged,
                "skipped_records": self.skipped_records,
            },
            "errors": [
                {"sku": e.sku, "raw_name": e.raw_name, "reason": e.reason} for e in self.errors
            ],
        }
        if self.detail is not None:
            out["detail"] = self.detail
        return out


def parse_feed(payload: object) -> FeedDocument:
    """Validate a decoded feed payload and lift it into a FeedDocument."""
    try:
        jsonschema.validate(payload, FEED_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise FeedFormatError(f"feed schema violation at {path}: {exc.message}") from exc
    assert isinstance(payload, dict)
    products = []
    seen_skus: set[str] = set()
    for item in payload["products"]:
        if item["sku"] in seen_skus:
            raise FeedFormatError(f"duplicate sku in feed: {item['sku']!r}")
        seen_skus.add(item["sku"])
        records = tuple(
            RawRecord(raw_name=p["name"], raw_value=p["value"], raw_unit=p.get("unit"))
            for p in item["parameters"]
        )
        products.append(FeedProduct(item["sku"], item["name"], item["category"], records))
    return FeedDocument(
        manufacturer_id=payload["manufacturer"]["id"],
        manufacturer_name=payload["manufacturer"]["name"],
        products=tuple(products),
    )


def fetch_feed(url: str, timeout: float = DEFAULT_FETCH_TIMEOUT) -> FeedDocument:
    """GET and validate one feed. Raises FeedHTTPError / FeedFormatError."""
    try:
        response = requests.get(url, timeout=timeout)
    except requests.RequestException as exc:
        raise FeedHTTPError(f"GET {url} failed: {exc}") from exc
    if response.status_code != 200:
        raise FeedHTTPError(f"GET {url} returned HTTP {response.status_code}")
    try:
        payload = response.json()
    except ValueError as exc:
        raise FeedFormatError(f"malformed JSON from {url}: {exc}") from exc
    return parse_feed(payload)


def _normalize_feed_product(
    source_id: str,
    feed_product: FeedProduct,
    registry: VocabularyRegistry,
    now: datetime,
) -> tuple[Product, list[RecordError]]:
    """Best-effort normalization: bad records are skipped, the product survives."""
    errors: list[RecordError] = []
    parameters = []
    seen_names: set[str] = set()
    for record in feed_product.records:
        try:
            parameter = registry.normalize_record(record)
        except NormalizationError as exc:
            errors.append(RecordError(feed_product.sku, record.raw_name, str(exc)))
            continue
        if parameter.canonical_name.name in seen_names:
            errors.append(
                RecordError(
                    feed_product.sku,
                    record.raw_name,
                    f"duplicate canonical name {parameter.canonical_name.name!r}",
                )
            )
            continue
        seen_names.add(parameter.canonical_name.name)
        parameters.append(parameter)
    product = Product(
        id=f"{source_id}/{feed_product.sku}",
        manufacturer_id=source_id,
        sku=feed_product.sku,
        display_name=feed_product.name,
        category=feed_product.category,
        parameters=tuple(parameters),
        revision=1,
        first_seen=now,
        last_seen=now,
    )
    return product, errors


def sync_source(
    store: Store,
    source: Manufacturer,
    registry: VocabularyRegistry | None = None,
    timeout: float = DEFAULT_FETCH_TIMEOUT,
) -> CrawlReport:
    """One full sync of one source; never raises, all failure modes are reported."""
    if source.feed_url is None:
        raise ValueError(f"source {source.id!r} has no feed_url")
    registry = registry or default_registry()
    store.ensure_manufacturer(source)
    now = utc_now()
    try:
        feed = fetch_feed(source.feed_url, timeout=timeout)
        if feed.manufacturer_id != source.id:
            raise FeedFormatError(
                f"feed manufacturer id {feed.manufacturer_id!r} does not match source {source.id!r}"
            )
    except FeedHTTPError as exc:
        store.mark_source_failure(source.id)
        logger.warning("sync %s: %s", source.id, exc)
        return CrawlReport(source.id, now, CrawlOutcome.HTTP_ERROR, detail=str(exc))
    except FeedFormatError as exc:
        store.mark_source_failure(source.id)
        logger.warning("sync %s: %s", source.id, exc)
        return CrawlReport(source.id, now, CrawlOutcome.PARSE_ERROR, detail=str(exc))

    inserted = updated = unchanged = 0
    errors: list[RecordError] = []
    for feed_product in feed.products:
        product, record_errors = _normalize_feed_product(source.id, feed_product, registry, now)
        errors.extend(record_errors)
        outcome = store.upsert_product(product)
        if outcome is UpsertOutcome.INSERTED:
            inserted += 1
        elif outcome is UpsertOutcome.UPDATED:
            updated += 1
        else:
            unchanged += 1
    store.mark_source_success(source.id)
    for error in errors:
        logger.warning("sync %s: skipped %s/%s: %s", source.id, error.sku, error.raw_name, error.reason)
    return CrawlReport(
        source_id=source.id,
        fetched_at=now,
        outcome=CrawlOutcome.VOCAB_ERRORS if errors else CrawlOutcome.OK,
        inserted=inserted,
        updated=updated,
        unchanged=unchanged,
        skipped_records=len(errors),
        errors=tuple(errors),
    )


class Crawler:
    """Periodic sync of every source, one worker per source.

    Workers are independent: a slow or dead source never delays the others,
    and a given source is only ever synced by its own worker. stop() lets
    in-flight syncs finish before returning.
    """

    def __init__(
        self,
        store: Store,
        sources: Sequence[Manufacturer],
        interval: float,
        registry: VocabularyRegistry | None = None,
        timeout: float = DEFAULT_FETCH_TIMEOUT,
        on_report: Callable[[CrawlReport], None] | None = None,
    ):
        if interval <= 0:
            raise ValueError("crawl interval must be > 0")
        for source in sources:
            if source.feed_url is None:
                raise ValueError(f"source {source.id!r} has no feed_url")
        self._store = store
        self._sources = list(sources)
        self._interval = interval
        self._registry = registry or default_registry()
        self._timeout = timeout
        self._on_report = on_report
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def _worker(self, source: Manufacturer) -> None:
        while not self._stop.is_set():
            report = sync_source(self._store, source, registry=self._registry, timeout=self._timeout)
            if self._on_report is not None:
                self._on_report(report)
            self._stop.wait(self._interval)

    def start(self) -> None:
        if self._threads:
            raise RuntimeError("crawler already started")
        for source in self._sources:
            thread = threading.Thread(target=self._worker, args=(source,), name=f"crawl-{source.id}")
            thread.start()
            self._threads.append(thread)

    def stop(self) -> None:
        self._stop.set()
        for thread in self._threads:
            thread.join()
        self._threads.clear()

    def sync_all_once(self) -> list[CrawlReport]:
        """Sequential single pass over all sources (must not run while started)."""
        reports = []
        for source in self._sources:
            report = sync_source(self._store, source, registry=self._registry, timeout=self._timeout)
            if self._on_report is not None:
                self._on_report(report)
            reports.append(report)
        return reports
