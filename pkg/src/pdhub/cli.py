"""Operator command line for the hub: serve, crawl, search, publish, fixtures.

Exit codes: 2 configuration problems, 3 network problems, 4 validation
problems, 1 anything else.
"""

from __future__ import annotations

import json
import logging
import time
from pathlib import Path

import click
import requests

from .api import API_PREFIX, create_app
from .config import ENV_CONFIG_VAR, ConfigError, HubConfig, load_config
from .crawler import CrawlReport, Crawler
from .mock_manufacturer import FixtureError, MockManufacturerServer, generate_fixtures
from .model import LOCAL_MANUFACTURER_ID, Manufacturer, ModelError, canonical_name
from .search import Criterion, SearchQuery, search as run_search
from .store import Store, StoreError
from .util import dec, dec_str
from .vocab import NormalizationError, default_registry, parse_value_string

EXIT_CONFIG = 2
EXIT_NETWORK = 3
EXIT_VALIDATION = 4

logger = logging.getLogger(__name__)


def _fail(exit_code: int, message: str) -> "SystemExit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(exit_code)


def _require_config(config_path: str | None) -> HubConfig:
    if config_path is None:
        raise _fail(EXIT_CONFIG, f"no configuration file (use --config or ${ENV_CONFIG_VAR})")
    try:
        return load_config(config_path)
    except ConfigError as exc:
        raise _fail(EXIT_CONFIG, str(exc))


def _open_store(config: HubConfig) -> Store:
    path = Path(config.store_path)
    if path.exists():
        try:
            store = Store.load_snapshot(path, staleness_threshold=config.staleness_threshold)
        except StoreError as exc:
            raise _fail(EXIT_CONFIG, str(exc))
    else:
        store = Store(staleness_threshold=config.staleness_threshold)
    store.ensure_manufacturer(Manufacturer(id=LOCAL_MANUFACTURER_ID, name="Local templates"))
    for manufacturer in config.manufacturers():
        store.ensure_manufacturer(manufacturer)
    return store


@click.group()
@click.option(
    "--config",
    "config_path",
    envvar=ENV_CONFIG_VAR,
    default=None,
    metavar="PATH",
    help=f"Hub configuration file (or ${ENV_CONFIG_VAR}).",
)
@click.option("--verbose", is_flag=True, help="Debug logging.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, verbose: bool):
    """Product data hub."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = config_path


@main.command()
@click.option("--host", default=None, help="Override configured listen host.")
@click.option("--port", default=None, type=int, help="Override configured listen port.")
@click.pass_obj
def serve(config_path: str | None, host: str | None, port: int | None):
    """Run the API server plus the periodic crawler."""
    import uvicorn

    config = _require_config(config_path)
    store = _open_store(config)
    app = create_app(
        store,
        default_uncertainty=config.default_uncertainty,
        persist_path=config.store_path,
        ui_dir=config.ui_dir,
    )

    def on_report(report: CrawlReport) -> None:
        logger.info(
            "sync %s: %s (+%d ~%d =%d skipped %d)",
            report.source_id,
            report.outcome.value,
            report.inserted,
            report.updated,
            report.unchanged,
            report.skipped_records,
        )
        store.save_snapshot(config.store_path)

    crawler = None
    if config.sources:
        crawler = Crawler(
            store,
            config.manufacturers(),
            config.crawl_interval,
            timeout=config.fetch_timeout,
            on_report=on_report,
        )
        crawler.start()
    try:
        uvicorn.run(app, host=host or config.host, port=port or config.port, log_level="warning")
    finally:
        if crawler is not None:
            crawler.stop()
        store.save_snapshot(config.store_path)


def _print_reports(reports: list[CrawlReport], as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True))
        return
    header = f"{'source':<16} {'outcome':<12} {'ins':>4} {'upd':>4} {'unch':>5} {'skip':>5}"
    click.echo(header)
    click.echo("-" * len(header))
    for report in reports:
        click.echo(
            f"{report.source_id:<16} {report.outcome.value:<12} "
            f"{report.inserted:>4} {report.updated:>4} {report.unchanged:>5} {report.skipped_records:>5}"
        )
        if report.detail:
            click.echo(f"  {report.detail}")
        for error in report.errors:
            click.echo(f"  skipped {error.sku}/{error.raw_name}: {error.reason}")


@main.command()
@click.option("--once", is_flag=True, help="Sync every source once, then exit.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable reports.")
@click.pass_obj
def crawl(config_path: str | None, once: bool, as_json: bool):
    """Sync configured sources into the store."""
    config = _require_config(config_path)
    if not config.sources:
        raise _fail(EXIT_CONFIG, "no sources configured")
    store = _open_store(config)
    try:
        crawler = Crawler(
            store,
            config.manufacturers(),
            config.crawl_interval,
            timeout=config.fetch_timeout,
            on_report=lambda report: store.save_snapshot(config.store_path),
        )
    except ValueError as exc:
        raise _fail(EXIT_CONFIG, str(exc))
    if once:
        reports = crawler.sync_all_once()
        store.save_snapshot(config.store_path)
        _print_reports(reports, as_json)
        return
    crawler.start()
    click.echo(f"crawling {len(config.sources)} sources every {config.crawl_interval}s (Ctrl-C to stop)")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        crawler.stop()
        store.save_snapshot(config.store_path)


def _criterion_from_flag(spec: str) -> Criterion:
    name_part, _, value_part = spec.partition("=")
    if not value_part:
        raise _fail(EXIT_VALIDATION, f"--param must look like name=value, got {spec!r}")
    try:
        name = canonical_name(name_part.strip())
        value, symbol = parse_value_string(value_part.strip())
        unit = default_registry().resolve_unit(symbol) if symbol else None
        if symbol and unit is None:
            raise _fail(EXIT_VALIDATION, f"unknown unit {symbol!r} in {spec!r}")
        return Criterion(name=name, target=value, unit=unit)
    except (ModelError, NormalizationError) as exc:
        raise _fail(EXIT_VALIDATION, f"bad --param {spec!r}: {exc}")


def _load_optional_config(config_path: str | None) -> HubConfig:
    if config_path is None:
        return HubConfig()
    try:
        return load_config(config_path)
    except ConfigError as exc:
        raise _fail(EXIT_CONFIG, str(exc))


def _criteria_from_equipment_file(path: str) -> list[Criterion]:
    registry = default_registry()
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        criteria = []
        for entry in payload.get("parameters", ()):
            name = canonical_name(entry["name"])
            value, symbol = parse_value_string(str(entry["value"]))
            unit = registry.resolve_unit(entry["unit"]) if entry.get("unit") else (
                registry.resolve_unit(symbol) if symbol else None
            )
            uncertainty = dec(str(entry["uncertainty"])) if "uncertainty" in entry else None
            criteria.append(Criterion(name=name, target=value, unit=unit, uncertainty=uncertainty))
        return criteria
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ModelError, NormalizationError, ValueError) as exc:
        raise _fail(EXIT_VALIDATION, f"bad equipment file {path}: {exc}")


@main.command()
@click.option("--param", "params", multiple=True, metavar="NAME=VALUE", help="Criterion, e.g. mass=0.5kg.")
@click.option("--equipment", "equipment_file", default=None, metavar="FILE", help="Criteria from an equipment file.")
@click.option("--uncertainty", default=None, type=str, help="Default uncertainty fraction (e.g. 0.1).")
@click.option("--category", default=None)
@click.option("--allow-missing", is_flag=True)
@click.option("--include-stale", is_flag=True)
@click.option("--limit", default=100, type=int)
@click.option("--hub", "hub_url", default=None, metavar="URL", help="Query a running hub over HTTP.")
@click.option("--store", "store_path", default=None, metavar="PATH", help="Query a local snapshot file.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def search(
    config_path: str | None,
    params: tuple[str, ...],
    equipment_file: str | None,
    uncertainty: str | None,
    category: str | None,
    allow_missing: bool,
    include_stale: bool,
    limit: int,
    hub_url: str | None,
    store_path: str | None,
    as_json: bool,
):
    """Tolerance search against a running hub or a local snapshot."""
    config = _load_optional_config(config_path)
    try:
        default_uncertainty = dec(uncertainty) if uncertainty is not None else config.default_uncertainty
        if not default_uncertainty.is_finite() or default_uncertainty < 0:
            raise ValueError("uncertainty must be a finite fraction >= 0")
    except (ValueError, TypeError) as exc:
        raise _fail(EXIT_VALIDATION, f"bad --uncertainty: {exc}")

    if hub_url is not None:
        body: dict = {
            "criteria": _criteria_payload(params, equipment_file),
            "default_uncertainty": dec_str(default_uncertainty),
            "allow_missing": allow_missing,
            "include_stale": include_stale,
            "limit": limit,
        }
        if category:
            body["category"] = category
        try:
            response = requests.post(f"{hub_url.rstrip('/')}{API_PREFIX}/search", json=body, timeout=30)
        except requests.RequestException as exc:
            raise _fail(EXIT_NETWORK, f"hub unreachable: {exc}")
        if response.status_code != 200:
            raise _fail(EXIT_VALIDATION, f"hub rejected the query: {response.text}")
        payload = response.json()
        if as_json:
            click.echo(json.dumps(payload, indent=2, sort_keys=True))
        else:
            _print_ranked(payload["results"])
        return

    criteria = [_criterion_from_flag(p) for p in params]
    if equipment_file:
        criteria.extend(_criteria_from_equipment_file(equipment_file))
    try:
        query = SearchQuery(
            criteria=tuple(criteria),
            default_uncertainty=default_uncertainty,
            category=category,
            allow_missing=allow_missing,
            include_stale=include_stale,
            limit=limit,
        )
    except ModelError as exc:
        raise _fail(EXIT_VALIDATION, str(exc))

    snapshot_path = store_path or config.store_path
    try:
        store = Store.load_snapshot(snapshot_path)
    except StoreError as exc:
        raise _fail(EXIT_CONFIG, str(exc))
    result = run_search(query, store.catalog())
    rows = [
        {
            "product_id": match.product_id,
            "score": dec_str(match.score),
            "distances": {k: dec_str(v) for k, v in sorted(match.distances.items())},
            "product": store.get_product(match.product_id).to_dict(),
        }
        for match in result.ranked
    ]
    if as_json:
        click.echo(json.dumps({"results": rows, "total_matches": result.total_matches}, indent=2, sort_keys=True))
    else:
        _print_ranked(rows)


def _criteria_payload(params: tuple[str, ...], equipment_file: str | None) -> list[dict]:
    criteria = []
    for criterion in [_criterion_from_flag(p) for p in params]:
        entry: dict = {"name": criterion.name.name, "value": criterion.target.render()}
        if criterion.unit is not None:
            entry["unit"] = criterion.unit.symbol
        criteria.append(entry)
    if equipment_file:
        for criterion in _criteria_from_equipment_file(equipment_file):
            entry = {"name": criterion.name.name, "value": criterion.target.render()}
            if criterion.unit is not None:
                entry["unit"] = criterion.unit.symbol
            if criterion.uncertainty is not None:
                entry["uncertainty"] = dec_str(criterion.uncertainty)
            criteria.append(entry)
    return criteria


def _print_ranked(rows: list[dict]) -> None:
    if not rows:
        click.echo("no matches")
        return
    header = f"{'#':>3} {'score':>10} {'product':<28} name"
    click.echo(header)
    click.echo("-" * len(header))
    for rank, row in enumerate(rows, start=1):
        click.echo(f"{rank:>3} {row['score']:>10} {row['product_id']:<28} {row['product']['name']}")


@main.command("import")
@click.argument("equipment_path", metavar="EQUIPMENT_FILE")
@click.option("--hub", "hub_url", required=True, metavar="URL")
@click.option("--sku", default=None, help="Override the sku in the file.")
@click.pass_obj
def import_equipment(config_path: str | None, equipment_path: str, hub_url: str, sku: str | None):
    """Publish an equipment file as a local template product."""
    try:
        payload = json.loads(Path(equipment_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise _fail(EXIT_VALIDATION, f"cannot read equipment file: {exc}")
    if sku:
        payload["sku"] = sku
    try:
        response = requests.post(f"{hub_url.rstrip('/')}{API_PREFIX}/products", json=payload, timeout=30)
    except requests.RequestException as exc:
        raise _fail(EXIT_NETWORK, f"hub unreachable: {exc}")
    if response.status_code not in (200, 201):
        raise _fail(EXIT_VALIDATION, f"hub rejected the submission: {response.text}")
    body = response.json()
    click.echo(f"{body['outcome']}: {body['product']['id']}")


@main.command("export-snapshot")
@click.option("--store", "store_path", default=None, metavar="PATH")
@click.option("--out", "out_path", default="-", metavar="PATH", help="Output file, - for stdout.")
@click.pass_obj
def export_snapshot(config_path: str | None, store_path: str | None, out_path: str):
    """Re-serialize a snapshot in canonical form (validates it on the way)."""
    config = _load_optional_config(config_path)
    path = store_path or config.store_path
    try:
        store = Store.load_snapshot(path)
    except StoreError as exc:
        raise _fail(EXIT_CONFIG, str(exc))
    text = store.snapshot().to_json()
    if out_path == "-":
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")


@main.command("mock-serve")
@click.option("--fixtures", "fixture_dir", required=True, metavar="DIR")
@click.option("--port", default=8900, type=int)
@click.option("--fail", "fail_sources", multiple=True, metavar="SOURCE_ID", help="Serve 503 for this source.")
def mock_serve(fixture_dir: str, port: int, fail_sources: tuple[str, ...]):
    """Serve feed fixtures like a set of manufacturer endpoints."""
    try:
        server = MockManufacturerServer(fixture_dir, port=port, fail_sources=fail_sources)
    except FixtureError as exc:
        raise _fail(EXIT_CONFIG, str(exc))
    for source_id in sorted(server.feeds):
        state = " (failing)" if source_id in server.failing else ""
        click.echo(f"{server.url_for(source_id)}{state}")
    server.start()
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()


@main.command("gen-fixtures")
@click.option("--seed", default=1, type=int)
@click.option("--count", default=10, type=int, help="Products per vendor.")
@click.option("--out", "out_dir", required=True, metavar="DIR")
def gen_fixtures(seed: int, count: int, out_dir: str):
    """Generate reproducible random feed fixtures."""
    if count < 0:
        raise _fail(EXIT_VALIDATION, "--count must be >= 0")
    for path in generate_fixtures(seed, count, out_dir):
        click.echo(str(path))


if __name__ == "__main__":
    main()
