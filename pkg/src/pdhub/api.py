"""HTTP/JSON API: the single access point clients integrate against.

Versioned under /api/v1. Read endpoints are loss-free views of the store;
POST /search runs the in-process search engine (no translation layer that
could change results); POST /products publishes client equipment under the
reserved "local" manufacturer and can never overwrite crawled data.

Every non-2xx response body has exactly the shape
{"status": int, "code": str, "message": str}; field-level validation detail
is folded into the message.
"""

from __future__ import annotations

import logging
from decimal import Decimal
from pathlib import Path

import jsonschema
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .model import (
    LOCAL_MANUFACTURER_ID,
    CanonicalParameterName,
    Manufacturer,
    ModelError,
    Parameter,
    ParameterValue,
    Product,
    QuantityKind,
    Unit,
    canonical_name,
    canonicalize_entry,
)
from .search import Criterion, RankedMatch, SearchQuery, search
from .store import ProductNotFoundError, Store, UpsertOutcome
from .util import dec, dec_str, slugify, utc_now
from .vocab import EmptyValueError, VocabularyRegistry, default_registry, parse_value_string

logger = logging.getLogger(__name__)

API_PREFIX = "/api/v1"

DEFAULT_PAGE_LIMIT = 50
DEFAULT_SEARCH_LIMIT = 100


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"status": status, "code": code, "message": message}, status_code=status)


_ENTRY_PROPS = {
    "name": {"type": "string", "minLength": 1},
    "value": {"type": ["string", "number"]},
    "unit": {"type": "string", "minLength": 1},
}

SEARCH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "criteria": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "value"],
                "additionalProperties": False,
                "properties": {**_ENTRY_PROPS, "uncertainty": {"type": ["string", "number"]}},
            },
        },
        "default_uncertainty": {"type": ["string", "number"]},
        "category": {"type": "string"},
        "allow_missing": {"type": "boolean"},
        "include_stale": {"type": "boolean"},
        "limit": {"type": "integer", "minimum": 0},
    },
}

# Equipment submissions may carry per-parameter uncertainties; a published
# product has no uncertainty, so the field is accepted and dropped.
SUBMISSION_SCHEMA = {
    "type": "object",
    "required": ["name", "parameters"],
    "additionalProperties": False,
    "properties": {
        "sku": {"type": "string", "minLength": 1},
        "name": {"type": "string", "minLength": 1},
        "category": {"type": "string"},
        "derived_from": {"type": "string"},
        "parameters": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "value"],
                "additionalProperties": False,
                "properties": {
                    **_ENTRY_PROPS,
                    "approximate": {"type": "boolean"},
                    "uncertainty": {"type": ["string", "number"]},
                },
            },
        },
    },
}


def _validate_body(payload: object, schema: dict) -> dict:
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "body"
        raise ApiError(400, "validation_error", f"{path}: {exc.message}") from exc
    assert isinstance(payload, dict)
    return payload


def _parse_decimal(value: object, where: str) -> Decimal:
    try:
        if isinstance(value, float):
            return dec(str(value))
        return dec(value)  # type: ignore[arg-type]
    except (ValueError, TypeError) as exc:
        raise ApiError(400, "validation_error", f"{where}: not a decimal number") from exc


def _parse_uncertainty(value: object, where: str) -> Decimal:
    uncertainty = _parse_decimal(value, where)
    if not uncertainty.is_finite() or uncertainty < 0:
        raise ApiError(400, "validation_error", f"{where}: uncertainty must be a finite fraction >= 0")
    return uncertainty


def _parse_entry(
    registry: VocabularyRegistry,
    entry: dict,
    where: str,
) -> tuple[CanonicalParameterName, ParameterValue, Unit | None]:
    """Shared parsing for search criteria and published parameters.

    Names must be canonical (vendor vocabulary is the crawler's business);
    string values go through the same grammar as feed values; a missing unit
    on mass/length means the canonical unit.
    """
    try:
        name = canonical_name(entry["name"])
    except ModelError:
        raise ApiError(400, "unknown_parameter", f"{where}: unknown canonical parameter {entry['name']!r}")

    raw_value = entry["value"]
    parsed_symbol: str | None = None
    if name.kind is QuantityKind.CATEGORICAL:
        if not isinstance(raw_value, str) or not raw_value.strip():
            raise ApiError(400, "validation_error", f"{where}: {name.name!r} needs a non-empty label")
        if entry.get("unit") is not None:
            raise ApiError(400, "kind_mismatch", f"{where}: categorical {name.name!r} carries no unit")
        return name, ParameterValue(label=raw_value.strip()), None

    if isinstance(raw_value, str):
        try:
            value, parsed_symbol = parse_value_string(raw_value)
        except EmptyValueError:
            raise ApiError(400, "validation_error", f"{where}: blank value")
        if value.numeric is None:
            raise ApiError(400, "validation_error", f"{where}: {name.name!r} needs a numeric value")
    elif isinstance(raw_value, bool):
        raise ApiError(400, "validation_error", f"{where}: {name.name!r} needs a numeric value")
    else:
        value = ParameterValue(numeric=_parse_decimal(raw_value, where))
    if entry.get("approximate"):
        value = ParameterValue(numeric=value.numeric, approximate=True)

    symbol = entry.get("unit") or parsed_symbol
    unit: Unit | None = None
    if symbol is not None:
        unit = registry.resolve_unit(symbol)
        if unit is None:
            raise ApiError(400, "unknown_unit", f"{where}: unknown unit {symbol!r}")
        if unit.kind is not name.kind:
            raise ApiError(
                400,
                "kind_mismatch",
                f"{where}: unit {unit.symbol!r} is {unit.kind.value}, but {name.name!r} is {name.kind.value}",
            )
    elif name.kind in (QuantityKind.MASS, QuantityKind.LENGTH):
        unit = registry.unit("kg") if name.kind is QuantityKind.MASS else registry.unit("m")
    return name, value, unit


def _parse_search_query(
    registry: VocabularyRegistry, payload: dict, default_uncertainty: Decimal
) -> SearchQuery:
    criteria = []
    seen: set[str] = set()
    for index, entry in enumerate(payload.get("criteria", ())):
        where = f"criteria[{index}]"
        name, value, unit = _parse_entry(registry, entry, where)
        if name.name in seen:
            raise ApiError(400, "duplicate_parameter", f"{where}: duplicate criterion {name.name!r}")
        seen.add(name.name)
        uncertainty = None
        if "uncertainty" in entry:
            uncertainty = _parse_uncertainty(entry["uncertainty"], where)
        try:
            criteria.append(Criterion(name=name, target=value, unit=unit, uncertainty=uncertainty))
        except ModelError as exc:
            raise ApiError(400, "validation_error", f"{where}: {exc}") from exc
    if "default_uncertainty" in payload:
        default_uncertainty = _parse_uncertainty(payload["default_uncertainty"], "default_uncertainty")
    try:
        return SearchQuery(
            criteria=tuple(criteria),
            default_uncertainty=default_uncertainty,
            category=payload.get("category"),
            allow_missing=bool(payload.get("allow_missing", False)),
            include_stale=bool(payload.get("include_stale", False)),
            limit=int(payload.get("limit", DEFAULT_SEARCH_LIMIT)),
        )
    except ModelError as exc:
        raise ApiError(400, "validation_error", str(exc)) from exc


def _ranked_to_dict(match: RankedMatch, store: Store) -> dict:
    return {
        "product_id": match.product_id,
        "score": dec_str(match.score),
        "distances": {name: dec_str(d) for name, d in sorted(match.distances.items())},
        "product": store.get_product(match.product_id).to_dict(),
    }


def _parse_int_param(raw: str | None, fallback: int, minimum: int, where: str) -> int:
    if raw is None:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        raise ApiError(400, "invalid_pagination", f"{where} must be an integer, got {raw!r}")
    if value < minimum:
        raise ApiError(400, "invalid_pagination", f"{where} must be >= {minimum}")
    return value


def _parse_bool_param(raw: str | None, fallback: bool, where: str) -> bool:
    if raw is None:
        return fallback
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes"):
        return True
    if lowered in ("0", "false", "no"):
        return False
    raise ApiError(400, "validation_error", f"{where} must be a boolean, got {raw!r}")


def create_app(
    store: Store,
    registry: VocabularyRegistry | None = None,
    default_uncertainty: Decimal = Decimal("0.1"),
    persist_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the API application bound to one store instance.

    ui_dir optionally points at a built single-page client to serve statically
    at /; the API is complete without it.
    """
    registry = registry or default_registry()
    app = FastAPI(title="Product Data Hub", docs_url=None, redoc_url=None, openapi_url=None)

    store.ensure_manufacturer(Manufacturer(id=LOCAL_MANUFACTURER_ID, name="Local templates"))

    def persist() -> None:
        if persist_path is not None:
            store.save_snapshot(persist_path)

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return _error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(StarletteHTTPException)
    async def handle_http_exception(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(exc.status_code, "http_error")
        return _error_response(exc.status_code, code, str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return _error_response(400, "validation_error", str(exc.errors()))

    @app.exception_handler(Exception)
    async def handle_unexpected(request: Request, exc: Exception):
        logger.exception("unhandled error on %s %s", request.method, request.url.path)
        return _error_response(500, "internal_error", "internal server error")

    @app.get(f"{API_PREFIX}/healthz")
    def healthz():
        return {
            "status": "ok",
            "product_count": store.product_count,
            "sources": [m.to_dict() for m in store.list_manufacturers()],
        }

    @app.get(f"{API_PREFIX}/manufacturers")
    def list_manufacturers():
        return {"items": [m.to_dict() for m in store.list_manufacturers()]}

    @app.get(f"{API_PREFIX}/products")
    def list_products(
        request: Request,
        category: str | None = None,
        manufacturer: str | None = None,
    ):
        params = request.query_params
        limit = _parse_int_param(params.get("limit"), DEFAULT_PAGE_LIMIT, 0, "limit")
        offset = _parse_int_param(params.get("offset"), 0, 0, "offset")
        include_stale = _parse_bool_param(params.get("include_stale"), False, "include_stale")
        page = store.list_products(
            category=category,
            manufacturer_id=manufacturer,
            include_stale=include_stale,
            limit=limit,
            offset=offset,
        )
        return {
            "items": [p.to_dict() for p in page.items],
            "total": page.total,
            "limit": limit,
            "offset": offset,
        }

    @app.get(API_PREFIX + "/products/{product_id:path}")
    def get_product(product_id: str):
        try:
            return store.get_product(product_id).to_dict()
        except ProductNotFoundError as exc:
            raise ApiError(404, "not_found", str(exc))

    @app.post(f"{API_PREFIX}/search")
    async def run_search(request: Request):
        try:
            payload = await request.json()
        except ValueError:
            raise ApiError(400, "validation_error", "request body is not valid JSON")
        body = _validate_body(payload, SEARCH_SCHEMA)
        query = _parse_search_query(registry, body, default_uncertainty)
        result = search(query, store.catalog())
        return {
            "results": [_ranked_to_dict(match, store) for match in result.ranked],
            "total_matches": result.total_matches,
            "limit": query.limit,
        }

    @app.post(API_PREFIX + "/products", status_code=201)
    async def publish_product(request: Request):
        try:
            payload = await request.json()
        except ValueError:
            raise ApiError(400, "validation_error", "request body is not valid JSON")
        body = _validate_body(payload, SUBMISSION_SCHEMA)

        sku = body.get("sku") or slugify(body["name"])
        if not sku:
            raise ApiError(400, "validation_error", "cannot derive a sku from the product name")
        if store.has_product(sku):
            colliding = store.get_product(sku)
            if colliding.manufacturer_id != LOCAL_MANUFACTURER_ID:
                raise ApiError(
                    409,
                    "sku_conflict",
                    f"sku {sku!r} collides with crawled product {colliding.id!r}",
                )

        parameters = []
        seen: set[str] = set()
        for index, entry in enumerate(body["parameters"]):
            where = f"parameters[{index}]"
            name, value, unit = _parse_entry(registry, entry, where)
            if name.name in seen:
                raise ApiError(400, "duplicate_parameter", f"{where}: duplicate parameter {name.name!r}")
            seen.add(name.name)
            raw_value = entry["value"]
            try:
                value, unit = canonicalize_entry(name, value, unit, where)
                parameter = Parameter(
                    canonical_name=name,
                    value=value,
                    unit=unit,
                    raw_name=entry["name"],
                    raw_value=raw_value if isinstance(raw_value, str) else dec_str(_parse_decimal(raw_value, where)),
                    raw_unit=entry.get("unit"),
                )
            except ModelError as exc:
                raise ApiError(400, "validation_error", f"{where}: {exc}") from exc
            parameters.append(parameter)

        now = utc_now()
        try:
            candidate = Product(
                id=f"{LOCAL_MANUFACTURER_ID}/{sku}",
                manufacturer_id=LOCAL_MANUFACTURER_ID,
                sku=sku,
                display_name=body["name"],
                category=body.get("category", "template"),
                parameters=tuple(parameters),
                revision=1,
                first_seen=now,
                last_seen=now,
            )
        except ModelError as exc:
            raise ApiError(400, "validation_error", str(exc)) from exc
        outcome = store.upsert_product(candidate)
        persist()
        stored = store.get_product(candidate.id)
        status = 201 if outcome is UpsertOutcome.INSERTED else 200
        return JSONResponse(
            {"outcome": outcome.value, "product": stored.to_dict()}, status_code=status
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        from starlette.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
