"""Small shared helpers: canonical decimal/JSON/timestamp rendering and atomic writes."""

from __future__ import annotations

import json
import os
import re
import tempfile
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path


def dec(value: int | str | Decimal) -> Decimal:
    """Coerce to Decimal. Floats are rejected so binary noise never enters the model."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        raise TypeError("refusing float -> Decimal; pass a string or Decimal")
    try:
        return Decimal(value)
    except InvalidOperation as exc:
        raise ValueError(f"not a decimal number: {value!r}") from exc


def dec_str(value: Decimal) -> str:
    """Canonical plain-form rendering: no trailing zeros, no exponent notation.

    Numerically equal decimals always render identically, which is what makes
    snapshot serialization byte-stable.
    """
    return format(value.normalize(), "f")


def fraction_str(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def format_ts(ts: datetime) -> str:
    """ISO-8601 UTC with fixed microsecond precision and Z suffix."""
    return ts.astimezone(timezone.utc).isoformat(timespec="microseconds").replace("+00:00", "Z")


def parse_ts(text: str) -> datetime:
    # datetime.fromisoformat on 3.10 does not accept the Z suffix
    return datetime.fromisoformat(text.replace("Z", "+00:00"))


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, compact separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"


def pretty_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via temp file + rename so readers never observe a torn file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


_SLUG_RE = re.compile(r"[^a-z0-9]+")


def slugify(text: str) -> str:
    """URL-safe slug: lowercase alphanumerics joined by single hyphens."""
    slug = _SLUG_RE.sub("-", text.lower()).strip("-")
    return slug
