"""Persistent, source-independent storage of manufacturers and products.

The store is an embedded, file-backed catalog: all state lives in memory as
immutable value objects, mutations are serialized behind one lock, and a
snapshot can be written to disk as a canonical JSON document (sorted keys,
atomic rename), so identical state always yields identical bytes.

Products survive source outages: a manufacturer that keeps failing is flagged
unreachable and its products turn stale, but nothing is ever deleted and
stale products stay readable.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Callable

from .model import Manufacturer, Product, SourceStatus
from .util import atomic_write_text, canonical_json, format_ts, parse_ts, utc_now

SNAPSHOT_SCHEMA_VERSION = 1

DEFAULT_STALENESS_THRESHOLD = 3


class StoreError(Exception):
    pass


class UnknownManufacturerError(StoreError):
    def __init__(self, manufacturer_id: str):
        super().__init__(f"unknown manufacturer: {manufacturer_id!r}")
        self.manufacturer_id = manufacturer_id


class ProductNotFoundError(StoreError):
    def __init__(self, product_id: str):
        super().__init__(f"no such product: {product_id!r}")
        self.product_id = product_id


class SnapshotError(StoreError):
    pass


class UpsertOutcome(str, Enum):
    INSERTED = "inserted"
    UPDATED = "updated"
    UNCHANGED = "unchanged"


@dataclass(frozen=True)
class ProductPage:
    items: tuple[Product, ...]
    total: int


@dataclass(frozen=True)
class StoreSnapshot:
    schema_version: int
    manufacturers: tuple[Manufacturer, ...]
    products: tuple[Product, ...]
    written_at: datetime

    def __post_init__(self):
        manufacturer_ids = {m.id for m in self.manufacturers}
        if len(manufacturer_ids) != len(self.manufacturers):
            raise SnapshotError("duplicate manufacturer ids in snapshot")
        product_ids = set()
        for product in self.products:
            if product.id in product_ids:
                raise SnapshotError(f"duplicate product id in snapshot: {product.id!r}")
            product_ids.add(product.id)
            if product.manufacturer_id not in manufacturer_ids:
                raise SnapshotError(
                    f"product {product.id!r} references unknown manufacturer {product.manufacturer_id!r}"
                )

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "written_at": format_ts(self.written_at),
            "manufacturers": [m.to_dict() for m in self.manufacturers],
            "products": [p.to_dict() for p in self.products],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "StoreSnapshot":
        try:
            version = data["schema_version"]
            if version != SNAPSHOT_SCHEMA_VERSION:
                raise SnapshotError(
                    f"snapshot schema_version {version!r} not supported (expected {SNAPSHOT_SCHEMA_VERSION})"
                )
            return cls(
                schema_version=version,
                manufacturers=tuple(Manufacturer.from_dict(m) for m in data["manufacturers"]),
                products=tuple(Product.from_dict(p) for p in data["products"]),
                written_at=parse_ts(data["written_at"]),
            )
        except SnapshotError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise SnapshotError(f"corrupt snapshot: {exc}") from exc


class Store:
    """In-memory catalog with serialized writes and snapshot persistence."""

    def __init__(
        self,
        staleness_threshold: int = DEFAULT_STALENESS_THRESHOLD,
        clock: Callable[[], datetime] = utc_now,
    ):
        if staleness_threshold < 1:
            raise ValueError("staleness_threshold must be >= 1")
        self.staleness_threshold = staleness_threshold
        self._clock = clock
        self._lock = threading.RLock()
        self._manufacturers: dict[str, Manufacturer] = {}
        self._products: dict[str, Product] = {}

    # -- manufacturers ----------------------------------------------------

    def ensure_manufacturer(self, manufacturer: Manufacturer) -> Manufacturer:
        """Register a manufacturer; an existing entry keeps its runtime state.

        Name and feed_url are refreshed from the given record (configuration
        wins), while status/failure counters/last_success survive reloads.
        """
        with self._lock:
            existing = self._manufacturers.get(manufacturer.id)
            if existing is None:
                self._manufacturers[manufacturer.id] = manufacturer
                return manufacturer
            merged = replace(existing, name=manufacturer.name, feed_url=manufacturer.feed_url)
            self._manufacturers[manufacturer.id] = merged
            return merged

    def get_manufacturer(self, manufacturer_id: str) -> Manufacturer:
        with self._lock:
            try:
                return self._manufacturers[manufacturer_id]
            except KeyError:
                raise UnknownManufacturerError(manufacturer_id) from None

    def list_manufacturers(self) -> tuple[Manufacturer, ...]:
        with self._lock:
            return tuple(self._manufacturers[mid] for mid in sorted(self._manufacturers))

    def mark_source_failure(self, manufacturer_id: str) -> Manufacturer:
        """Record one failed sync; at the staleness threshold the source goes
        unreachable and its products turn stale (but stay retrievable)."""
        with self._lock:
            manufacturer = self.get_manufacturer(manufacturer_id)
            failures = manufacturer.consecutive_failures + 1
            status = manufacturer.status
            if failures >= self.staleness_threshold:
                status = SourceStatus.UNREACHABLE
                self._set_stale(manufacturer_id, True)
            updated = replace(manufacturer, consecutive_failures=failures, status=status)
            self._manufacturers[manufacturer_id] = updated
            return updated

    def mark_source_success(self, manufacturer_id: str) -> Manufacturer:
        with self._lock:
            manufacturer = self.get_manufacturer(manufacturer_id)
            updated = replace(
                manufacturer,
                consecutive_failures=0,
                status=SourceStatus.ACTIVE,
                last_success=self._clock(),
            )
            self._manufacturers[manufacturer_id] = updated
            self._set_stale(manufacturer_id, False)
            return updated

    def _set_stale(self, manufacturer_id: str, stale: bool) -> None:
        for pid, product in self._products.items():
            if product.manufacturer_id == manufacturer_id and product.stale != stale:
                self._products[pid] = replace(product, stale=stale)

    # -- products ----------------------------------------------------------

    def upsert_product(self, candidate: Product) -> UpsertOutcome:
        """Insert or update by product id; revision/first_seen/last_seen/stale
        are derived here, whatever the candidate carries for them."""
        with self._lock:
            if candidate.manufacturer_id not in self._manufacturers:
                raise UnknownManufacturerError(candidate.manufacturer_id)
            now = self._clock()
            existing = self._products.get(candidate.id)
            if existing is None:
                stored = replace(candidate, revision=1, first_seen=now, last_seen=now, stale=False)
                self._products[candidate.id] = stored
                return UpsertOutcome.INSERTED
            if existing.content_key() == candidate.content_key():
                self._products[candidate.id] = replace(existing, last_seen=now)
                return UpsertOutcome.UNCHANGED
            stored = replace(
                candidate,
                revision=existing.revision + 1,
                first_seen=existing.first_seen,
                last_seen=now,
                stale=False,
            )
            self._products[candidate.id] = stored
            return UpsertOutcome.UPDATED

    def get_product(self, product_id: str) -> Product:
        with self._lock:
            try:
                return self._products[product_id]
            except KeyError:
                raise ProductNotFoundError(product_id) from None

    def has_product(self, product_id: str) -> bool:
        with self._lock:
            return product_id in self._products

    @property
    def product_count(self) -> int:
        with self._lock:
            return len(self._products)

    def catalog(self, include_stale: bool = True) -> tuple[Product, ...]:
        """Consistent, id-ordered view of the catalog at this instant."""
        with self._lock:
            products = [self._products[pid] for pid in sorted(self._products)]
        if not include_stale:
            products = [p for p in products if not p.stale]
        return tuple(products)

    def list_products(
        self,
        category: str | None = None,
        manufacturer_id: str | None = None,
        include_stale: bool = False,
        limit: int | None = None,
        offset: int = 0,
    ) -> ProductPage:
        if limit is not None and limit < 0:
            raise ValueError("limit must be >= 0")
        if offset < 0:
            raise ValueError("offset must be >= 0")
        selected = [
            p
            for p in self.catalog()
            if (include_stale or not p.stale)
            and (category is None or p.category == category)
            and (manufacturer_id is None or p.manufacturer_id == manufacturer_id)
        ]
        total = len(selected)
        window = selected[offset:] if limit is None else selected[offset : offset + limit]
        return ProductPage(items=tuple(window), total=total)

    # -- persistence ---------------------------------------------------------

    def snapshot(self) -> StoreSnapshot:
        with self._lock:
            return StoreSnapshot(
                schema_version=SNAPSHOT_SCHEMA_VERSION,
                manufacturers=self.list_manufacturers(),
                products=self.catalog(),
                written_at=self._clock(),
            )

    def save_snapshot(self, path: str | Path) -> StoreSnapshot:
        snapshot = self.snapshot()
        atomic_write_text(path, snapshot.to_json())
        return snapshot

    @classmethod
    def load_snapshot(
        cls,
        path: str | Path,
        staleness_threshold: int = DEFAULT_STALENESS_THRESHOLD,
        clock: Callable[[], datetime] = utc_now,
    ) -> "Store":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"corrupt snapshot {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise SnapshotError(f"corrupt snapshot {path}: not a JSON object")
        snapshot = StoreSnapshot.from_dict(data)
        store = cls(staleness_threshold=staleness_threshold, clock=clock)
        with store._lock:
            store._manufacturers = {m.id: m for m in snapshot.manufacturers}
            store._products = {p.id: p for p in snapshot.products}
        return store

    def verify_integrity(self) -> None:
        """Full-scan referential integrity check (cheap at desk scale)."""
        with self._lock:
            for product in self._products.values():
                if product.manufacturer_id not in self._manufacturers:
                    raise StoreError(
                        f"integrity violation: product {product.id!r} references "
                        f"unknown manufacturer {product.manufacturer_id!r}"
                    )
                if product.id != f"{product.manufacturer_id}/{product.sku}":
                    raise StoreError(f"integrity violation: malformed product id {product.id!r}")
