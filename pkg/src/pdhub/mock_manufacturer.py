"""Mock manufacturer endpoints: static feed server plus fixture generation.

Real component shops expose no machine-readable APIs, so integration runs
against local stand-ins that serve feed documents over HTTP. The server can
simulate an outage per source (503 on every request), which is how the
availability-bridging behavior gets exercised.
"""

from __future__ import annotations

import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .crawler import FEED_SCHEMA_ID, parse_feed
from .util import pretty_json

DEFAULT_CATEGORIES = ("adcs", "power", "comms", "computer", "solar_panel", "structure")


class FixtureError(Exception):
    pass


class _FeedHandler(BaseHTTPRequestHandler):
    server: "MockManufacturerServer"

    def do_GET(self):  # noqa: N802 (http.server API)
        feeds = self.server.feeds
        failing = self.server.failing
        for source_id, body in feeds.items():
            if self.path == f"/{source_id}/feed.json":
                if source_id in failing:
                    self._send(503, json.dumps({"error": "service unavailable"}).encode())
                    return
                self._send(200, body)
                return
        self._send(404, json.dumps({"error": "not found"}).encode())

    def _send(self, status: int, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, format, *args):  # quiet by default
        pass


class MockManufacturerServer(ThreadingHTTPServer):
    """Serves each fixture feed verbatim at /<source_id>/feed.json."""

    def __init__(self, fixture_dir: str | Path, port: int = 0, fail_sources: tuple[str, ...] = ()):
        self.feeds: dict[str, bytes] = {}
        self.failing: set[str] = set(fail_sources)
        fixture_dir = Path(fixture_dir)
        for path in sorted(fixture_dir.glob("*.json")):
            body = path.read_bytes()
            try:
                document = parse_feed(json.loads(body))
            except Exception as exc:
                raise FixtureError(f"invalid feed fixture {path}: {exc}") from exc
            self.feeds[document.manufacturer_id] = body
        if not self.feeds:
            raise FixtureError(f"no feed fixtures (*.json) found in {fixture_dir}")
        unknown = self.failing - set(self.feeds)
        if unknown:
            raise FixtureError(f"--fail names unknown sources: {sorted(unknown)}")
        super().__init__(("127.0.0.1", port), _FeedHandler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def url_for(self, source_id: str) -> str:
        return f"{self.base_url}/{source_id}/feed.json"

    def set_failing(self, source_id: str, failing: bool = True) -> None:
        if failing:
            self.failing.add(source_id)
        else:
            self.failing.discard(source_id)

    def start(self) -> None:
        self._thread = threading.Thread(target=self.serve_forever, name="mock-manufacturer")
        self._thread.start()

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join()
            self._thread = None

    def __enter__(self) -> "MockManufacturerServer":
        self.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self.stop()


# -- fixture generation -------------------------------------------------------

# Each profile mimics one real-world vocabulary style: explicit SI units,
# gram/millimetre unit words, and shop-style names with units embedded in the
# value string (sometimes approximate).
_PROFILES = (
    {
        "id": "vendor-a",
        "name": "Vendor A",
        "sku_prefix": "va",
        "nouns": ("Reaction Wheel", "Star Tracker", "Onboard Computer", "Magnetorquer"),
        "style": "si",
    },
    {
        "id": "vendor-b",
        "name": "Vendor B",
        "sku_prefix": "vb",
        "nouns": ("Battery Pack", "Antenna", "Transceiver", "Power Unit"),
        "style": "milli",
    },
    {
        "id": "vendor-c",
        "name": "Vendor C",
        "sku_prefix": "vc",
        "nouns": ("Solar Panel", "Deployable Panel", "Solar Array"),
        "style": "shop",
    },
)


def _si_parameters(rng: random.Random) -> list[dict]:
    mass_kg = rng.randint(20, 5000)
    out = [{"name": "massPerUnit", "value": f"{mass_kg / 1000:.3f}", "unit": "kg"}]
    if rng.random() < 0.3:
        out.append({"name": "radius", "value": f"{rng.randint(5, 150) / 1000:.3f}", "unit": "m"})
    else:
        for axis in ("sizeX", "sizeY", "sizeZ"):
            out.append({"name": axis, "value": f"{rng.randint(5, 400) / 1000:.3f}", "unit": "m"})
    out.append({"name": "shape", "value": rng.choice(("box", "cylinder"))})
    return out


def _milli_parameters(rng: random.Random) -> list[dict]:
    return [
        {"name": "Weigth", "value": str(rng.randint(20, 5000)), "unit": "gram"},
        {"name": "Height", "value": str(rng.randint(5, 400)), "unit": "millimetre"},
        {"name": "Length", "value": str(rng.randint(5, 400)), "unit": "millimetre"},
        {"name": "Width", "value": str(rng.randint(5, 400)), "unit": "millimetre"},
    ]


def _shop_parameters(rng: random.Random) -> list[dict]:
    mass_name = rng.choice(("Mass", "Very low solar cell mass", "Side solar panel weight"))
    thickness_name = rng.choice(("Panel Thickness", "Nominal thickness", "PCB Thickness"))
    marker = "ca. " if rng.random() < 0.5 else ""
    return [
        {"name": mass_name, "value": f"{marker}{rng.randint(20, 400)}g"},
        {"name": thickness_name, "value": f"{rng.randint(10, 40) / 10:.1f} mm"},
    ]


_STYLES = {"si": _si_parameters, "milli": _milli_parameters, "shop": _shop_parameters}


def generate_fixtures(seed: int, n_products: int, out_dir: str | Path) -> list[Path]:
    """Write one reproducible feed per vendor profile; same seed, same bytes."""
    if n_products < 0:
        raise ValueError("n_products must be >= 0")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    written = []
    for profile in _PROFILES:
        style = _STYLES[profile["style"]]
        products = []
        for index in range(n_products):
            category = rng.choice(DEFAULT_CATEGORIES) if profile["style"] != "shop" else "solar_panel"
            products.append(
                {
                    "sku": f"{profile['sku_prefix']}-{index:04d}",
                    "name": f"{rng.choice(profile['nouns'])} {index:04d}",
                    "category": category,
                    "parameters": style(rng),
                }
            )
        feed = {
            "schema": FEED_SCHEMA_ID,
            "manufacturer": {"id": profile["id"], "name": profile["name"]},
            "products": products,
        }
        path = out_dir / f"{profile['id']}.json"
        path.write_text(pretty_json(feed), encoding="utf-8")
        written.append(path)
    return written
