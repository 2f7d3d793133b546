from __future__ import annotations

import json
from decimal import Decimal

import pytest
from fastapi.testclient import TestClient

from pdhub.api import create_app
from pdhub.model import Manufacturer, canonical_name, label_value, numeric_value
from pdhub.search import Criterion, SearchQuery, search
from pdhub.store import Store

from conftest import check_golden, make_product
from oracles import oracle_search

ERROR_KEYS = {"status", "code", "message"}


@pytest.fixture
def client(seeded_store):
    app = create_app(seeded_store, default_uncertainty=Decimal("0.1"))
    return TestClient(app, raise_server_exceptions=False)


@pytest.fixture
def small_client(clock):
    """Three-product hub for the pagination examples."""
    store = Store(clock=clock)
    store.ensure_manufacturer(Manufacturer(id="vendor-a", name="Vendor A", feed_url="http://x/f"))
    for sku, mass in (("p1", "0.1"), ("p2", "0.2"), ("p3", "0.3")):
        store.upsert_product(make_product("vendor-a", sku, {"mass": mass}))
    return TestClient(create_app(store), raise_server_exceptions=False)


def assert_error_shape(response, status: int, code: str):
    assert response.status_code == status
    body = response.json()
    assert set(body) == ERROR_KEYS
    assert body["status"] == status
    assert body["code"] == code


class TestReadEndpoints:
    def test_unknown_product_is_404(self, client):
        response = client.get("/api/v1/products/vendor-a/nope")
        assert_error_shape(response, 404, "not_found")

    def test_get_product_by_slashed_id(self, client):
        response = client.get("/api/v1/products/vendor-b/bat-2s")
        assert response.status_code == 200
        body = response.json()
        assert body["id"] == "vendor-b/bat-2s"
        by_name = {p["name"]: p for p in body["parameters"]}
        assert by_name["mass"]["value"] == "0.52"
        assert by_name["mass"]["raw"] == {"name": "Weigth", "value": "520", "unit": "gram"}

    def test_pagination_with_total(self, small_client):
        response = small_client.get("/api/v1/products?limit=2")
        assert response.status_code == 200
        body = response.json()
        assert len(body["items"]) == 2
        assert body["total"] == 3
        assert [p["id"] for p in body["items"]] == ["vendor-a/p1", "vendor-a/p2"]

    def test_malformed_pagination(self, client):
        assert_error_shape(client.get("/api/v1/products?limit=banana"), 400, "invalid_pagination")
        assert_error_shape(client.get("/api/v1/products?offset=-1"), 400, "invalid_pagination")

    def test_category_filter(self, client):
        response = client.get("/api/v1/products?category=solar_panel")
        ids = [p["id"] for p in response.json()["items"]]
        assert ids == ["vendor-c/sp-1u", "vendor-c/sp-3u", "vendor-c/sp-side"]

    def test_healthz_counts_and_sources(self, client, seeded_store):
        response = client.get("/api/v1/healthz")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["product_count"] == 9
        assert {s["id"] for s in body["sources"]} == {"local", "vendor-a", "vendor-b", "vendor-c"}

    def test_healthz_on_empty_hub(self):
        empty = TestClient(create_app(Store()))
        body = empty.get("/api/v1/healthz").json()
        assert body["product_count"] == 0

    def test_manufacturers_listing(self, client):
        body = client.get("/api/v1/manufacturers").json()
        assert [m["id"] for m in body["items"]] == ["local", "vendor-a", "vendor-b", "vendor-c"]

    def test_read_endpoints_do_not_mutate(self, client, seeded_store):
        before = seeded_store.snapshot().to_dict()
        del before["written_at"]
        client.get("/api/v1/products")
        client.get("/api/v1/products/vendor-a/rw-250")
        client.get("/api/v1/manufacturers")
        client.get("/api/v1/healthz")
        client.post("/api/v1/search", json={"criteria": []})
        after = seeded_store.snapshot().to_dict()
        del after["written_at"]
        assert json.dumps(before, sort_keys=True) == json.dumps(after, sort_keys=True)


class TestSearchEndpoint:
    def test_mass_search_matches_engine(self, client, seeded_store):
        body = {"criteria": [{"name": "mass", "value": 0.5, "unit": "kg"}], "default_uncertainty": 0.1}
        response = client.post("/api/v1/search", json=body)
        assert response.status_code == 200
        payload = response.json()
        query = SearchQuery(
            criteria=(Criterion(canonical_name("mass"), numeric_value("0.5")),),
            default_uncertainty=Decimal("0.1"),
            limit=100,
        )
        engine = search(query, seeded_store.catalog())
        assert [r["product_id"] for r in payload["results"]] == [m.product_id for m in engine.ranked]
        assert [r["score"] for r in payload["results"]] == [str(m.score) for m in engine.ranked]
        # 0.48 kg and 0.52 kg both sit 0.02 from the target (distance 0.4); tie broken by id
        assert [r["product_id"] for r in payload["results"]] == ["vendor-a/rw-250", "vendor-b/bat-2s"]
        assert [r["distances"] for r in payload["results"]] == [{"mass": "0.4"}, {"mass": "0.4"}]

    def test_search_agrees_with_brute_force_oracle(self, client, seeded_store):
        body = {
            "criteria": [
                {"name": "mass", "value": "0.1", "unit": "kg", "uncertainty": 0.9},
                {"name": "shape", "value": "box"},
            ],
            "allow_missing": False,
        }
        payload = client.post("/api/v1/search", json=body).json()
        query = SearchQuery(
            criteria=(
                Criterion(canonical_name("mass"), numeric_value("0.1"), uncertainty=Decimal("0.9")),
                Criterion(canonical_name("shape"), label_value("box")),
            ),
            default_uncertainty=Decimal("0.1"),
            limit=100,
        )
        rows = oracle_search(query, seeded_store.catalog())
        assert [r["product_id"] for r in payload["results"]] == [row[0] for row in rows]

    def test_empty_criteria_returns_all_non_stale(self, client, seeded_store):
        payload = client.post("/api/v1/search", json={"criteria": []}).json()
        assert len(payload["results"]) == 9
        assert all(r["score"] == "0" for r in payload["results"])

    def test_unknown_parameter_rejected(self, client):
        response = client.post(
            "/api/v1/search", json={"criteria": [{"name": "frobnicate", "value": 1}]}
        )
        assert_error_shape(response, 400, "unknown_parameter")

    def test_unknown_unit_rejected(self, client):
        response = client.post(
            "/api/v1/search", json={"criteria": [{"name": "mass", "value": 1, "unit": "blorp"}]}
        )
        assert_error_shape(response, 400, "unknown_unit")

    def test_kind_mismatch_rejected(self, client):
        response = client.post(
            "/api/v1/search", json={"criteria": [{"name": "mass", "value": 1, "unit": "mm"}]}
        )
        assert_error_shape(response, 400, "kind_mismatch")

    def test_duplicate_criterion_rejected(self, client):
        response = client.post(
            "/api/v1/search",
            json={"criteria": [{"name": "mass", "value": 1}, {"name": "mass", "value": 2}]},
        )
        assert_error_shape(response, 400, "duplicate_parameter")

    def test_gram_criterion_equals_kilogram_criterion(self, client):
        in_kg = client.post(
            "/api/v1/search",
            json={"criteria": [{"name": "mass", "value": 0.5, "unit": "kg"}], "default_uncertainty": 0.1},
        ).json()
        in_g = client.post(
            "/api/v1/search",
            json={"criteria": [{"name": "mass", "value": 500, "unit": "g"}], "default_uncertainty": 0.1},
        ).json()
        assert in_kg == in_g

    def test_value_strings_accepted(self, client):
        payload = client.post(
            "/api/v1/search",
            json={"criteria": [{"name": "mass", "value": "500 g"}], "default_uncertainty": 0.1},
        ).json()
        assert [r["product_id"] for r in payload["results"]] == [
            "vendor-a/rw-250",
            "vendor-b/bat-2s",
        ]

    def test_stale_excluded_by_default(self, client, seeded_store):
        for _ in range(3):
            seeded_store.mark_source_failure("vendor-b")
        without = client.post("/api/v1/search", json={"criteria": []}).json()
        assert len(without["results"]) == 6
        with_stale = client.post("/api/v1/search", json={"criteria": [], "include_stale": True}).json()
        assert len(with_stale["results"]) == 9


class TestPublishEndpoint:
    def test_small_battery_template_round_trip(self, client):
        submission = {
            "name": "small battery",
            "category": "power",
            "parameters": [{"name": "mass", "value": 0.05, "unit": "kg"}],
        }
        response = client.post("/api/v1/products", json=submission)
        assert response.status_code == 201
        body = response.json()
        assert body["outcome"] == "inserted"
        assert body["product"]["id"] == "local/small-battery"
        assert body["product"]["revision"] == 1

        found = client.post(
            "/api/v1/search",
            json={"criteria": [{"name": "mass", "value": 0.05}], "default_uncertainty": 0.1},
        ).json()
        assert found["results"][0]["product_id"] == "local/small-battery"

    def test_manual_datasheet_entry_uses_same_path(self, client):
        submission = {
            "name": "Antenna From Datasheet",
            "sku": "antenna-ds",
            "category": "comms",
            "parameters": [
                {"name": "mass", "value": "85", "unit": "g"},
                {"name": "length", "value": "98 mm"},
            ],
        }
        body = client.post("/api/v1/products", json=submission).json()
        assert body["product"]["id"] == "local/antenna-ds"
        by_name = {p["name"]: p for p in body["product"]["parameters"]}
        assert by_name["mass"]["value"] == "0.085"
        assert by_name["mass"]["unit"] == "kg"
        assert by_name["length"]["value"] == "0.098"

    def test_resubmission_follows_upsert_semantics(self, client):
        submission = {
            "name": "small battery",
            "sku": "small-battery",
            "parameters": [{"name": "mass", "value": 0.05}],
        }
        first = client.post("/api/v1/products", json=submission)
        assert first.status_code == 201
        again = client.post("/api/v1/products", json=submission)
        assert again.status_code == 200
        assert again.json()["outcome"] == "unchanged"
        changed = dict(submission, parameters=[{"name": "mass", "value": 0.06}])
        updated = client.post("/api/v1/products", json=changed)
        assert updated.status_code == 200
        assert updated.json()["outcome"] == "updated"
        assert updated.json()["product"]["revision"] == 2

    def test_duplicate_parameter_names_rejected(self, client):
        submission = {
            "name": "dup",
            "parameters": [{"name": "mass", "value": 1}, {"name": "mass", "value": 2}],
        }
        assert_error_shape(client.post("/api/v1/products", json=submission), 400, "duplicate_parameter")

    def test_sku_colliding_with_crawled_product_conflicts(self, client):
        submission = {
            "name": "shadow",
            "sku": "vendor-a/rw-250",
            "parameters": [{"name": "mass", "value": 1}],
        }
        assert_error_shape(client.post("/api/v1/products", json=submission), 409, "sku_conflict")
        # the crawled product is untouched
        original = client.get("/api/v1/products/vendor-a/rw-250").json()
        assert original["manufacturer_id"] == "vendor-a"

    def test_validation_failures(self, client):
        assert_error_shape(
            client.post("/api/v1/products", json={"parameters": []}), 400, "validation_error"
        )
        assert_error_shape(
            client.post(
                "/api/v1/products",
                json={"name": "x", "parameters": [{"name": "mass", "value": -1}]},
            ),
            400,
            "validation_error",
        )
        assert_error_shape(
            client.post(
                "/api/v1/products",
                json={"name": "x", "parameters": [{"name": "frobnicate", "value": 1}]},
            ),
            400,
            "unknown_parameter",
        )

    def test_published_products_persist(self, tmp_path, seeded_store):
        path = tmp_path / "store.json"
        app = create_app(seeded_store, persist_path=path)
        client = TestClient(app)
        client.post(
            "/api/v1/products",
            json={"name": "tpl", "parameters": [{"name": "mass", "value": 1}]},
        )
        assert path.exists()
        reloaded = Store.load_snapshot(path)
        assert reloaded.get_product("local/tpl").display_name == "tpl"


class TestStaticUi:
    def test_ui_served_when_configured(self, tmp_path, seeded_store):
        (tmp_path / "index.html").write_text("<!doctype html><title>hub ui</title>")
        client = TestClient(create_app(seeded_store, ui_dir=tmp_path))
        page = client.get("/")
        assert page.status_code == 200
        assert "hub ui" in page.text
        assert client.get("/api/v1/healthz").status_code == 200  # API unaffected

    def test_hub_complete_without_ui(self, seeded_store):
        client = TestClient(create_app(seeded_store), raise_server_exceptions=False)
        assert client.get("/").status_code == 404
        assert client.get("/api/v1/healthz").status_code == 200


class TestGoldenContract:
    def test_products_list_golden(self, request, client):
        check_golden(request, "api_products_list.json", client.get("/api/v1/products").json())

    def test_product_get_golden(self, request, client):
        check_golden(
            request, "api_product_get.json", client.get("/api/v1/products/vendor-b/bat-2s").json()
        )

    def test_manufacturers_golden(self, request, client):
        check_golden(request, "api_manufacturers.json", client.get("/api/v1/manufacturers").json())

    def test_healthz_golden(self, request, client):
        check_golden(request, "api_healthz.json", client.get("/api/v1/healthz").json())

    def test_search_golden(self, request, client):
        body = {
            "criteria": [{"name": "mass", "value": "0.5", "unit": "kg"}],
            "default_uncertainty": "0.1",
        }
        check_golden(request, "api_search_mass.json", client.post("/api/v1/search", json=body).json())

    def test_publish_golden(self, request, client):
        submission = {
            "name": "small battery",
            "category": "power",
            "parameters": [{"name": "mass", "value": "0.05", "unit": "kg"}],
        }
        check_golden(
            request, "api_publish.json", client.post("/api/v1/products", json=submission).json()
        )

    def test_not_found_golden(self, request, client):
        check_golden(request, "api_error_not_found.json", client.get("/api/v1/products/x/y").json())

    def test_unknown_parameter_golden(self, request, client):
        response = client.post("/api/v1/search", json={"criteria": [{"name": "frobnicate", "value": 1}]})
        check_golden(request, "api_error_unknown_parameter.json", response.json())
