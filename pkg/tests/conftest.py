from __future__ import annotations

import json
import re
from datetime import datetime, timedelta, timezone
from decimal import Decimal
from pathlib import Path

import pytest

from pdhub.crawler import sync_source
from pdhub.mock_manufacturer import MockManufacturerServer
from pdhub.model import (
    KILOGRAM,
    METRE,
    Manufacturer,
    Parameter,
    ParameterValue,
    Product,
    canonical_name,
)
from pdhub.store import Store

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_DIR = REPO_ROOT / "fixtures"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

T0 = datetime(2026, 1, 15, 12, 0, 0, tzinfo=timezone.utc)


def pytest_addoption(parser):
    parser.addoption("--update-goldens", action="store_true", help="Rewrite golden fixtures.")


class TickingClock:
    """Deterministic clock: each call advances by a fixed step."""

    def __init__(self, start: datetime = T0, step_ms: int = 250):
        self._now = start
        self._step = timedelta(milliseconds=step_ms)

    def __call__(self) -> datetime:
        now = self._now
        self._now = now + self._step
        return now


def make_parameter(name: str, value, unit=None, raw_name=None, approximate=False) -> Parameter:
    cname = canonical_name(name)
    if cname.kind.value == "categorical":
        pvalue = ParameterValue(label=str(value))
        punit = None
    else:
        pvalue = ParameterValue(numeric=Decimal(str(value)), approximate=approximate)
        punit = unit if unit is not None else {"mass": KILOGRAM, "length": METRE}.get(cname.kind.value)
    return Parameter(
        canonical_name=cname,
        value=pvalue,
        unit=punit,
        raw_name=raw_name or name,
        raw_value=str(value),
    )


def make_product(
    manufacturer_id: str,
    sku: str,
    params: dict,
    name: str | None = None,
    category: str = "misc",
    stale: bool = False,
    revision: int = 1,
) -> Product:
    return Product(
        id=f"{manufacturer_id}/{sku}",
        manufacturer_id=manufacturer_id,
        sku=sku,
        display_name=name or sku,
        category=category,
        parameters=tuple(make_parameter(n, v) for n, v in params.items()),
        revision=revision,
        first_seen=T0,
        last_seen=T0,
        stale=stale,
    )


@pytest.fixture
def clock():
    return TickingClock()


@pytest.fixture
def mock_vendors():
    server = MockManufacturerServer(FIXTURE_DIR, port=0)
    server.start()
    yield server
    server.stop()


def vendor_sources(server: MockManufacturerServer) -> list[Manufacturer]:
    return [
        Manufacturer(id=source_id, name=f"Vendor {source_id[-1].upper()}", feed_url=server.url_for(source_id))
        for source_id in sorted(server.feeds)
    ]


@pytest.fixture
def seeded_store(mock_vendors, clock):
    """Store populated by crawling the three shipped vendor fixtures."""
    store = Store(staleness_threshold=3, clock=clock)
    for source in vendor_sources(mock_vendors):
        report = sync_source(store, source)
        assert report.outcome.value == "ok", report
    return store


_TS_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\.\d{6}Z$")
_LOCAL_URL_RE = re.compile(r"^http://127\.0\.0\.1:\d+")


def normalize_timestamps(payload):
    """Replace timestamps and ephemeral local ports so goldens are stable across runs."""
    if isinstance(payload, dict):
        return {k: normalize_timestamps(v) for k, v in payload.items()}
    if isinstance(payload, list):
        return [normalize_timestamps(v) for v in payload]
    if isinstance(payload, str):
        if _TS_RE.match(payload):
            return "<timestamp>"
        return _LOCAL_URL_RE.sub("http://127.0.0.1:<port>", payload)
    return payload


def check_golden(request, name: str, payload) -> None:
    GOLDEN_DIR.mkdir(exist_ok=True)
    path = GOLDEN_DIR / name
    text = json.dumps(normalize_timestamps(payload), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if request.config.getoption("--update-goldens"):
        path.write_text(text, encoding="utf-8")
    assert path.exists(), f"golden {name} missing; run pytest --update-goldens"
    assert path.read_text(encoding="utf-8") == text, f"response for {name} drifted from golden"
