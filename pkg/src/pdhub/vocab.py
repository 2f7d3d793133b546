"""Vendor vocabulary and unit normalization.

Every vendor ships its own parameter names ("massPerUnit", "Weigth", "Panel
Thickness", ...) and units. This module maps those onto the canonical model:
name lookup against a registry file, a small value-string grammar for entries
like "ca. 45g", and exact rational unit conversion.

Unmapped names fail loudly instead of being guessed: identical-looking vendor
names carry divergent semantics, so a skipped-and-logged record is safer than
a silently wrong one.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .model import (
    CANONICAL_PARAMETERS,
    CANONICAL_UNITS,
    CanonicalParameterName,
    Parameter,
    ParameterValue,
    QuantityKind,
    Unit,
    canonical_name,
)
from .util import dec, parse_fraction

VOCAB_SCHEMA = "pdh-vocab/1"


class NormalizationError(ValueError):
    """Base for all record-normalization failures."""


class UnmappedNameError(NormalizationError):
    def __init__(self, raw_name: str):
        super().__init__(f"no vocabulary entry for parameter name {raw_name!r}")
        self.raw_name = raw_name


class KindMismatchError(NormalizationError):
    pass


class MissingUnitError(NormalizationError):
    pass


class EmptyValueError(NormalizationError):
    pass


@dataclass(frozen=True)
class RawRecord:
    """One vendor-side key/value pair, verbatim."""

    raw_name: str
    raw_value: str
    raw_unit: str | None = None

    def __post_init__(self):
        if not self.raw_name.strip():
            raise ValueError("raw_name must be non-empty")


@dataclass(frozen=True)
class NameEntry:
    vendor_name: str
    canonical: CanonicalParameterName
    source: str
    note: str | None = None


_PUNCT_RE = re.compile(r"[^\w\s]|_", re.UNICODE)
_WS_RE = re.compile(r"\s+")


def normalize_key(raw: str) -> str:
    """Case-fold, replace punctuation with spaces, collapse whitespace."""
    key = _PUNCT_RE.sub(" ", raw.casefold())
    return _WS_RE.sub(" ", key).strip()


_APPROX_MARKERS = ("ca.", "approx.", "~")

_VALUE_RE = re.compile(
    r"^\s*(?P<marker>ca\.|approx\.|~)?\s*"
    r"(?P<number>[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"\s*(?P<unit>[A-Za-z%µ°]+)?\s*$",
    re.IGNORECASE,
)


def parse_value_string(text: str) -> tuple[ParameterValue, str | None]:
    """Parse a vendor value string into a value plus an optional unit symbol.

    Grammar: [approx-marker] number [whitespace] [unit-symbol], where the
    marker is one of "ca.", "approx.", "~". Anything that does not fully match
    becomes a categorical label. Blank input is an error.
    """
    if not text or not text.strip():
        raise EmptyValueError("blank value string")
    match = _VALUE_RE.match(text)
    if match is None:
        return ParameterValue(label=text.strip()), None
    approximate = match.group("marker") is not None
    value = ParameterValue(numeric=dec(match.group("number")), approximate=approximate)
    return value, match.group("unit")


def convert(value: Decimal, from_unit: Unit, to_unit: Unit) -> Decimal:
    """Convert between two units of the same kind via exact rational factors."""
    if from_unit.kind is not to_unit.kind:
        raise KindMismatchError(
            f"cannot convert {from_unit.symbol!r} ({from_unit.kind.value}) "
            f"to {to_unit.symbol!r} ({to_unit.kind.value})"
        )
    ratio = from_unit.factor_to_canonical / to_unit.factor_to_canonical
    return value * Decimal(ratio.numerator) / Decimal(ratio.denominator)


def _to_canonical(value: Decimal, unit: Unit) -> Decimal:
    f = unit.factor_to_canonical
    return value * Decimal(f.numerator) / Decimal(f.denominator)


class VocabularyRegistry:
    """Immutable lookup tables for vendor names and unit symbols.

    Loaded once from a versioned JSON file; every operation afterwards is a
    pure function, so instances are safe to share between threads.
    """

    def __init__(self, names: list[NameEntry], units: list[Unit], aliases: dict[str, str]):
        self.names = tuple(names)
        self.units = tuple(units)
        # Canonical names always map to themselves, so normalizing an
        # already-normalized record is the identity.
        self._by_key: dict[str, CanonicalParameterName] = {
            normalize_key(name): canonical_name(name) for name in CANONICAL_PARAMETERS
        }
        for entry in names:
            key = normalize_key(entry.vendor_name)
            existing = self._by_key.get(key)
            if existing is not None and existing != entry.canonical:
                raise ValueError(
                    f"registry conflict: key {key!r} maps to both "
                    f"{existing.name!r} and {entry.canonical.name!r}"
                )
            self._by_key[key] = entry.canonical
        self._unit_by_symbol = {u.symbol: u for u in units}
        self._unit_by_alias = {alias.casefold(): symbol for alias, symbol in aliases.items()}
        for unit in units:
            self._unit_by_alias.setdefault(unit.symbol.casefold(), unit.symbol)

    @classmethod
    def from_file(cls, path: str | Path) -> "VocabularyRegistry":
        with open(path, encoding="utf-8") as handle:
            return cls.from_payload(json.load(handle))

    @classmethod
    def from_payload(cls, payload: dict) -> "VocabularyRegistry":
        if payload.get("schema") != VOCAB_SCHEMA:
            raise ValueError(f"unsupported vocabulary schema: {payload.get('schema')!r}")
        names = [
            NameEntry(
                vendor_name=row["vendor_name"],
                canonical=canonical_name(row["canonical"]),
                source=row.get("source", ""),
                note=row.get("note"),
            )
            for row in payload["names"]
        ]
        units = []
        aliases: dict[str, str] = {}
        for row in payload["units"]:
            unit = Unit(row["symbol"], QuantityKind(row["kind"]), parse_fraction(row["factor"]))
            units.append(unit)
            for alias in row.get("aliases", ()):
                aliases[alias] = unit.symbol
        return cls(names, units, aliases)

    def normalize_name(self, raw: str) -> CanonicalParameterName:
        """Map a vendor parameter name onto its canonical name, or fail loudly."""
        found = self._by_key.get(normalize_key(raw))
        if found is None:
            raise UnmappedNameError(raw)
        return found

    def resolve_unit(self, symbol: str) -> Unit | None:
        unit = self._unit_by_symbol.get(symbol)
        if unit is not None:
            return unit
        canonical_symbol = self._unit_by_alias.get(symbol.strip().casefold())
        if canonical_symbol is not None:
            return self._unit_by_symbol[canonical_symbol]
        return None

    def unit(self, symbol: str) -> Unit:
        unit = self.resolve_unit(symbol)
        if unit is None:
            raise MissingUnitError(f"unknown unit symbol {symbol!r}")
        return unit

    def normalize_record(
        self,
        record: RawRecord,
        default_units: dict[QuantityKind, Unit] | None = None,
    ) -> Parameter:
        """Turn one vendor record into a canonical Parameter.

        Unit resolution order: explicit raw_unit field, then a unit symbol
        parsed out of the value string, then the caller's default for the
        quantity kind. Mass/length records with no resolvable unit are
        rejected; a unit on a categorical record is ignored (it stays visible
        in the raw provenance).
        """
        name = self.normalize_name(record.raw_name)
        kind = name.kind

        if kind is QuantityKind.CATEGORICAL:
            if not record.raw_value.strip():
                raise EmptyValueError("blank value string")
            value = ParameterValue(label=record.raw_value.strip())
            return Parameter(
                canonical_name=name,
                value=value,
                unit=None,
                raw_name=record.raw_name,
                raw_value=record.raw_value,
                raw_unit=record.raw_unit,
            )

        value, parsed_symbol = parse_value_string(record.raw_value)
        if value.numeric is None:
            raise KindMismatchError(
                f"{name.name!r} is {kind.value} but value {record.raw_value!r} is not numeric"
            )

        symbol = record.raw_unit if record.raw_unit else parsed_symbol
        unit: Unit | None = None
        if symbol is not None:
            unit = self.resolve_unit(symbol)
            if unit is None:
                raise MissingUnitError(f"unknown unit symbol {symbol!r} on {name.name!r}")
        elif default_units:
            unit = default_units.get(kind)

        numeric = value.numeric
        if unit is not None:
            if unit.kind is not kind:
                raise KindMismatchError(
                    f"{name.name!r} is {kind.value} but unit {unit.symbol!r} is {unit.kind.value}"
                )
            numeric = _to_canonical(numeric, unit)
        elif kind is not QuantityKind.DIMENSIONLESS:
            raise MissingUnitError(f"no resolvable unit for {kind.value} parameter {name.name!r}")

        return Parameter(
            canonical_name=name,
            value=ParameterValue(numeric=numeric, approximate=value.approximate),
            unit=CANONICAL_UNITS[kind],
            raw_name=record.raw_name,
            raw_value=record.raw_value,
            raw_unit=record.raw_unit,
        )


@lru_cache(maxsize=1)
def default_registry() -> VocabularyRegistry:
    """The registry shipped with the hub (packaged data file)."""
    payload = json.loads(resources.files("pdhub.data").joinpath("vocabulary.json").read_text("utf-8"))
    return VocabularyRegistry.from_payload(payload)
