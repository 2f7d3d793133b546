from __future__ import annotations

import json
import random
from decimal import Decimal

import pytest

from pdhub.model import Manufacturer, SourceStatus
from pdhub.store import (
    ProductNotFoundError,
    SnapshotError,
    Store,
    UnknownManufacturerError,
    UpsertOutcome,
)

from conftest import T0, TickingClock, make_product


@pytest.fixture
def store(clock):
    s = Store(staleness_threshold=3, clock=clock)
    s.ensure_manufacturer(Manufacturer(id="vendor-a", name="Vendor A", feed_url="http://127.0.0.1:1/a"))
    s.ensure_manufacturer(Manufacturer(id="vendor-b", name="Vendor B", feed_url="http://127.0.0.1:1/b"))
    return s


class TestUpsert:
    def test_insert(self, store):
        outcome = store.upsert_product(make_product("vendor-a", "x", {"mass": "0.12"}))
        assert outcome is UpsertOutcome.INSERTED
        stored = store.get_product("vendor-a/x")
        assert stored.revision == 1
        assert stored.stale is False

    def test_identical_reupsert_is_unchanged(self, store):
        product = make_product("vendor-a", "x", {"mass": "0.12"})
        store.upsert_product(product)
        first = store.get_product("vendor-a/x")
        outcome = store.upsert_product(product)
        assert outcome is UpsertOutcome.UNCHANGED
        second = store.get_product("vendor-a/x")
        assert second.revision == 1
        assert second.first_seen == first.first_seen
        assert second.last_seen > first.last_seen  # only last_seen moves

    def test_changed_content_bumps_revision(self, store):
        store.upsert_product(make_product("vendor-a", "x", {"mass": "0.12"}))
        outcome = store.upsert_product(make_product("vendor-a", "x", {"mass": "0.125"}))
        assert outcome is UpsertOutcome.UPDATED
        stored = store.get_product("vendor-a/x")
        assert stored.revision == 2
        assert stored.parameters[0].value.numeric == Decimal("0.125")

    def test_unknown_manufacturer_rejected(self, store):
        with pytest.raises(UnknownManufacturerError):
            store.upsert_product(make_product("vendor-z", "x", {"mass": "0.12"}))

    def test_candidate_bookkeeping_fields_ignored(self, store):
        candidate = make_product("vendor-a", "x", {"mass": "0.12"}, revision=7, stale=True)
        store.upsert_product(candidate)
        stored = store.get_product("vendor-a/x")
        assert stored.revision == 1
        assert stored.stale is False
        assert stored.first_seen == stored.last_seen  # both derived from the store clock

    def test_upsert_twice_equals_once_except_last_seen(self, store):
        product = make_product("vendor-a", "x", {"mass": "0.12", "shape": "box"})
        store.upsert_product(product)
        once = store.get_product("vendor-a/x")
        store.upsert_product(product)
        twice = store.get_product("vendor-a/x")
        assert once.to_dict() | {"last_seen": ""} == twice.to_dict() | {"last_seen": ""}


class TestListing:
    def test_empty_store(self, store):
        page = store.list_products()
        assert page.items == ()
        assert page.total == 0

    def test_pagination_by_id_order(self, store):
        for sku in ("c", "a", "b"):
            store.upsert_product(make_product("vendor-a", sku, {"mass": "0.1"}))
        page = store.list_products(limit=2, offset=0)
        assert [p.id for p in page.items] == ["vendor-a/a", "vendor-a/b"]
        assert page.total == 3
        rest = store.list_products(limit=2, offset=2)
        assert [p.id for p in rest.items] == ["vendor-a/c"]

    def test_category_filter_matches_brute_force(self, store):
        rng = random.Random(7)
        categories = ("solar_panel", "power", "adcs")
        for index in range(20):
            store.upsert_product(
                make_product("vendor-a", f"p{index:02d}", {"mass": "0.1"}, category=rng.choice(categories))
            )
        page = store.list_products(category="solar_panel", limit=None)
        brute = [p for p in store.catalog() if p.category == "solar_panel"]
        assert list(page.items) == brute
        assert page.total == len(brute)

    def test_stale_excluded_unless_requested(self, store):
        store.upsert_product(make_product("vendor-a", "x", {"mass": "0.1"}))
        store.upsert_product(make_product("vendor-b", "y", {"mass": "0.2"}))
        for _ in range(3):
            store.mark_source_failure("vendor-b")
        assert [p.id for p in store.list_products().items] == ["vendor-a/x"]
        both = store.list_products(include_stale=True)
        assert [p.id for p in both.items] == ["vendor-a/x", "vendor-b/y"]

    def test_manufacturer_filter(self, store):
        store.upsert_product(make_product("vendor-a", "x", {"mass": "0.1"}))
        store.upsert_product(make_product("vendor-b", "y", {"mass": "0.2"}))
        page = store.list_products(manufacturer_id="vendor-b")
        assert [p.id for p in page.items] == ["vendor-b/y"]

    def test_get_unknown_product(self, store):
        with pytest.raises(ProductNotFoundError):
            store.get_product("vendor-a/nope")


class TestSourceHealth:
    def test_three_failures_hit_threshold(self, store):
        store.upsert_product(make_product("vendor-a", "x", {"mass": "0.1"}))
        for expected, _ in enumerate(range(2), start=1):
            m = store.mark_source_failure("vendor-a")
            assert m.consecutive_failures == expected
            assert m.status is SourceStatus.ACTIVE
        m = store.mark_source_failure("vendor-a")
        assert m.consecutive_failures == 3
        assert m.status is SourceStatus.UNREACHABLE
        stored = store.get_product("vendor-a/x")
        assert stored.stale is True  # flagged but still retrievable

    def test_success_resets_counter_and_staleness(self, store):
        store.upsert_product(make_product("vendor-a", "x", {"mass": "0.1"}))
        for _ in range(3):
            store.mark_source_failure("vendor-a")
        m = store.mark_source_success("vendor-a")
        assert m.consecutive_failures == 0
        assert m.status is SourceStatus.ACTIVE
        assert m.last_success is not None
        assert store.get_product("vendor-a/x").stale is False

    def test_failure_then_success_below_threshold(self, store):
        store.mark_source_failure("vendor-a")
        m = store.mark_source_success("vendor-a")
        assert m.consecutive_failures == 0
        assert m.status is SourceStatus.ACTIVE

    def test_unknown_source(self, store):
        with pytest.raises(UnknownManufacturerError):
            store.mark_source_failure("vendor-z")

    def test_products_survive_any_failure_sequence(self, store):
        ids = []
        for index in range(5):
            store.upsert_product(make_product("vendor-a", f"p{index}", {"mass": "0.1"}))
            ids.append(f"vendor-a/p{index}")
        rng = random.Random(3)
        for _ in range(30):
            if rng.random() < 0.7:
                store.mark_source_failure("vendor-a")
            else:
                store.mark_source_success("vendor-a")
        for pid in ids:
            assert store.get_product(pid).id == pid
        store.verify_integrity()


class TestSnapshots:
    def test_empty_round_trip(self, tmp_path, clock):
        store = Store(clock=clock)
        path = tmp_path / "store.json"
        store.save_snapshot(path)
        loaded = Store.load_snapshot(path)
        assert loaded.product_count == 0
        assert loaded.list_manufacturers() == ()

    def test_randomized_round_trip_structural_equality(self, tmp_path):
        rng = random.Random(11)
        clock = TickingClock()
        store = Store(clock=clock)
        manufacturers = ["vendor-a", "vendor-b", "vendor-c", "local"]
        for mid in manufacturers:
            feed = None if mid == "local" else f"http://127.0.0.1:1/{mid}/feed.json"
            store.ensure_manufacturer(Manufacturer(id=mid, name=mid.title(), feed_url=feed))
        shapes = ("box", "cylinder", "plate")
        for index in range(100):
            mid = rng.choice(manufacturers)
            params = {"mass": f"{rng.randint(1, 9000) / 1000}"}
            if rng.random() < 0.5:
                params["size_x"] = f"{rng.randint(1, 400)}e-3"
            if rng.random() < 0.3:
                params["shape"] = rng.choice(shapes)
            if rng.random() < 0.2:
                params["mass_margin"] = f"0.{rng.randint(0, 99):02d}"
            store.upsert_product(make_product(mid, f"sku-{index:03d}", params))
        for _ in range(3):  # exercise staleness in the persisted state
            store.mark_source_failure("vendor-b")

        path = tmp_path / "store.json"
        saved = store.save_snapshot(path)
        loaded = Store.load_snapshot(path)
        assert loaded.list_manufacturers() == store.list_manufacturers()
        assert loaded.catalog() == store.catalog()
        # structural oracle: dict forms match field by field
        assert [p.to_dict() for p in loaded.catalog()] == [p.to_dict() for p in store.catalog()]
        assert saved.schema_version == 1

    def test_round_trip_bytes_identical_under_fixed_clock(self, tmp_path):
        constant = lambda: T0  # noqa: E731
        store = Store(clock=constant)
        store.ensure_manufacturer(Manufacturer(id="vendor-a", name="Vendor A", feed_url="http://x/f.json"))
        store.upsert_product(make_product("vendor-a", "x", {"mass": "0.12"}))
        first = tmp_path / "one.json"
        second = tmp_path / "two.json"
        store.save_snapshot(first)
        reloaded = Store.load_snapshot(first, clock=constant)
        reloaded.save_snapshot(second)
        assert first.read_bytes() == second.read_bytes()

    def test_truncated_file_is_corrupt(self, tmp_path, store):
        store.upsert_product(make_product("vendor-a", "x", {"mass": "0.12"}))
        path = tmp_path / "store.json"
        store.save_snapshot(path)
        path.write_bytes(path.read_bytes()[:40])
        with pytest.raises(SnapshotError):
            Store.load_snapshot(path)

    def test_schema_version_mismatch(self, tmp_path, store):
        path = tmp_path / "store.json"
        store.save_snapshot(path)
        payload = json.loads(path.read_text())
        payload["schema_version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(SnapshotError, match="schema_version"):
            Store.load_snapshot(path)

    def test_referential_integrity_enforced_on_load(self, tmp_path, store):
        store.upsert_product(make_product("vendor-a", "x", {"mass": "0.12"}))
        path = tmp_path / "store.json"
        store.save_snapshot(path)
        payload = json.loads(path.read_text())
        payload["manufacturers"] = [m for m in payload["manufacturers"] if m["id"] != "vendor-a"]
        path.write_text(json.dumps(payload))
        with pytest.raises(SnapshotError, match="unknown manufacturer"):
            Store.load_snapshot(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SnapshotError):
            Store.load_snapshot(tmp_path / "absent.json")
