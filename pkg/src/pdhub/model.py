"""Canonical domain model shared by every hub module.

All types here are immutable value types (frozen dataclasses) with validation
at construction, so they can be shared across threads freely. The module does
no I/O; (de)serialization helpers produce plain dicts with numeric values in
canonical decimal-string form.

The canonical basis is SI: mass in kilogram, length in metre. Dimensionless
parameters are bare ratios and categorical parameters are labels; neither
carries a unit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import datetime
from decimal import Decimal
from enum import Enum
from fractions import Fraction

from .util import dec, dec_str, format_ts, parse_ts


class ModelError(ValueError):
    """Raised when a domain type would violate one of its invariants."""


class QuantityKind(str, Enum):
    MASS = "mass"
    LENGTH = "length"
    DIMENSIONLESS = "dimensionless"
    CATEGORICAL = "categorical"

    @property
    def is_numeric(self) -> bool:
        return self is not QuantityKind.CATEGORICAL


@dataclass(frozen=True)
class Unit:
    """A measurement unit with an exact rational scale to its kind's canonical unit."""

    symbol: str
    kind: QuantityKind
    factor_to_canonical: Fraction

    def __post_init__(self):
        if self.factor_to_canonical <= 0:
            raise ModelError(f"unit {self.symbol!r}: factor must be positive")

    @property
    def is_canonical(self) -> bool:
        return self.factor_to_canonical == 1


KILOGRAM = Unit("kg", QuantityKind.MASS, Fraction(1))
METRE = Unit("m", QuantityKind.LENGTH, Fraction(1))

#: Canonical unit per numeric kind; dimensionless values are stored as bare ratios.
CANONICAL_UNITS: dict[QuantityKind, Unit | None] = {
    QuantityKind.MASS: KILOGRAM,
    QuantityKind.LENGTH: METRE,
    QuantityKind.DIMENSIONLESS: None,
    QuantityKind.CATEGORICAL: None,
}

#: Closed registry of canonical parameter names and their quantity kinds.
CANONICAL_PARAMETERS: dict[str, QuantityKind] = {
    "mass": QuantityKind.MASS,
    "mass_margin": QuantityKind.DIMENSIONLESS,
    "shape": QuantityKind.CATEGORICAL,
    "size_x": QuantityKind.LENGTH,
    "size_y": QuantityKind.LENGTH,
    "size_z": QuantityKind.LENGTH,
    "height": QuantityKind.LENGTH,
    "width": QuantityKind.LENGTH,
    "length": QuantityKind.LENGTH,
    "thickness": QuantityKind.LENGTH,
    "radius": QuantityKind.LENGTH,
    "diameter": QuantityKind.LENGTH,
}


@dataclass(frozen=True)
class CanonicalParameterName:
    name: str
    kind: QuantityKind

    def __post_init__(self):
        expected = CANONICAL_PARAMETERS.get(self.name)
        if expected is None:
            raise ModelError(f"not a canonical parameter name: {self.name!r}")
        if expected is not self.kind:
            raise ModelError(f"canonical name {self.name!r} has kind {expected.value}, not {self.kind.value}")


def canonical_name(name: str) -> CanonicalParameterName:
    """Look up a canonical parameter name; raises ModelError for unknown names."""
    kind = CANONICAL_PARAMETERS.get(name)
    if kind is None:
        raise ModelError(f"not a canonical parameter name: {name!r}")
    return CanonicalParameterName(name, kind)


@dataclass(frozen=True)
class ParameterValue:
    """Either a numeric quantity or a categorical label, never both.

    The approximate flag records source wording such as "ca." without
    changing the stored number.
    """

    numeric: Decimal | None = None
    label: str | None = None
    approximate: bool = False

    def __post_init__(self):
        if (self.numeric is None) == (self.label is None):
            raise ModelError("exactly one of numeric/label must be set")
        if self.label is not None and not self.label.strip():
            raise ModelError("categorical label must be non-empty")

    @property
    def is_numeric(self) -> bool:
        return self.numeric is not None

    def render(self) -> str:
        if self.numeric is not None:
            return dec_str(self.numeric)
        return self.label  # type: ignore[return-value]


def numeric_value(value: int | str | Decimal, approximate: bool = False) -> ParameterValue:
    return ParameterValue(numeric=dec(value), approximate=approximate)


def label_value(label: str) -> ParameterValue:
    return ParameterValue(label=label)


def _check_value_for_kind(value: ParameterValue, kind: QuantityKind, where: str) -> None:
    if kind is QuantityKind.CATEGORICAL:
        if value.label is None:
            raise ModelError(f"{where}: categorical parameter needs a label value")
        return
    if value.numeric is None:
        raise ModelError(f"{where}: {kind.value} parameter needs a numeric value")
    if kind is QuantityKind.DIMENSIONLESS:
        if value.numeric < 0:
            raise ModelError(f"{where}: dimensionless value must be >= 0")
    elif value.numeric <= 0:
        raise ModelError(f"{where}: {kind.value} value must be positive")


def _check_unit_for_kind(unit: Unit | None, kind: QuantityKind, where: str, canonical_only: bool) -> None:
    if kind in (QuantityKind.CATEGORICAL, QuantityKind.DIMENSIONLESS):
        if unit is not None:
            raise ModelError(f"{where}: {kind.value} parameters carry no unit")
        return
    if unit is None:
        raise ModelError(f"{where}: {kind.value} parameter needs a unit")
    if unit.kind is not kind:
        raise ModelError(f"{where}: unit {unit.symbol!r} has kind {unit.kind.value}, expected {kind.value}")
    if canonical_only and not unit.is_canonical:
        raise ModelError(f"{where}: stored values must use the canonical unit, got {unit.symbol!r}")


def _to_canonical(value: Decimal, unit: Unit) -> Decimal:
    f = unit.factor_to_canonical
    return value * Decimal(f.numerator) / Decimal(f.denominator)


def canonicalize_entry(
    name: CanonicalParameterName, value: ParameterValue, unit: Unit | None, where: str
) -> tuple[ParameterValue, Unit | None]:
    """Normalize a (value, unit) pair to the canonical unit of the name's kind.

    A missing unit on a numeric entry means the value is already canonical.
    """
    if unit is None:
        unit = CANONICAL_UNITS[name.kind]
    if unit is not None and not unit.is_canonical:
        if unit.kind is not name.kind:
            raise ModelError(
                f"{where}: unit {unit.symbol!r} has kind {unit.kind.value}, expected {name.kind.value}"
            )
        if value.numeric is None:
            raise ModelError(f"{where}: unit given for a non-numeric value")
        value = ParameterValue(numeric=_to_canonical(value.numeric, unit), approximate=value.approximate)
        unit = CANONICAL_UNITS[name.kind]
    _check_value_for_kind(value, name.kind, where)
    _check_unit_for_kind(unit, name.kind, where, canonical_only=True)
    return value, unit


@dataclass(frozen=True)
class Parameter:
    """One normalized quantity plus the verbatim vendor wording it came from."""

    canonical_name: CanonicalParameterName
    value: ParameterValue
    unit: Unit | None
    raw_name: str
    raw_value: str
    raw_unit: str | None = None

    def __post_init__(self):
        where = f"parameter {self.canonical_name.name!r}"
        _check_value_for_kind(self.value, self.canonical_name.kind, where)
        _check_unit_for_kind(self.unit, self.canonical_name.kind, where, canonical_only=True)

    def to_dict(self) -> dict:
        out: dict = {
            "name": self.canonical_name.name,
            "kind": self.canonical_name.kind.value,
            "value": self.value.render(),
            "approximate": self.value.approximate,
        }
        if self.unit is not None:
            out["unit"] = self.unit.symbol
        raw: dict = {"name": self.raw_name, "value": self.raw_value}
        if self.raw_unit is not None:
            raw["unit"] = self.raw_unit
        out["raw"] = raw
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Parameter":
        name = canonical_name(data["name"])
        if name.kind is QuantityKind.CATEGORICAL:
            value = label_value(data["value"])
        else:
            value = numeric_value(data["value"], approximate=bool(data.get("approximate", False)))
        unit = CANONICAL_UNITS[name.kind]
        raw = data.get("raw", {})
        return cls(
            canonical_name=name,
            value=value,
            unit=unit,
            raw_name=raw.get("name", data["name"]),
            raw_value=raw.get("value", data["value"]),
            raw_unit=raw.get("unit"),
        )


class SourceStatus(str, Enum):
    ACTIVE = "active"
    UNREACHABLE = "unreachable"
    RETIRED = "retired"


LOCAL_MANUFACTURER_ID = "local"

_SLUG_ID_RE = re.compile(r"^[a-z0-9][a-z0-9_-]*$")


@dataclass(frozen=True)
class Manufacturer:
    id: str
    name: str
    feed_url: str | None = None
    status: SourceStatus = SourceStatus.ACTIVE
    consecutive_failures: int = 0
    last_success: datetime | None = None

    def __post_init__(self):
        if not _SLUG_ID_RE.match(self.id):
            raise ModelError(f"manufacturer id must be a URL-safe slug: {self.id!r}")
        if self.id == LOCAL_MANUFACTURER_ID and self.feed_url is not None:
            raise ModelError("the reserved 'local' manufacturer never has a feed_url")
        if self.consecutive_failures < 0:
            raise ModelError("consecutive_failures must be >= 0")

    def to_dict(self) -> dict:
        out: dict = {
            "id": self.id,
            "name": self.name,
            "status": self.status.value,
            "consecutive_failures": self.consecutive_failures,
        }
        if self.feed_url is not None:
            out["feed_url"] = self.feed_url
        if self.last_success is not None:
            out["last_success"] = format_ts(self.last_success)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Manufacturer":
        last_success = data.get("last_success")
        return cls(
            id=data["id"],
            name=data["name"],
            feed_url=data.get("feed_url"),
            status=SourceStatus(data.get("status", "active")),
            consecutive_failures=int(data.get("consecutive_failures", 0)),
            last_success=parse_ts(last_success) if last_success else None,
        )


def _check_unique_names(parameters, where: str) -> None:
    seen: set[str] = set()
    for param in parameters:
        name = param.canonical_name.name if isinstance(param, Parameter) else param.name.name
        if name in seen:
            raise ModelError(f"{where}: duplicate canonical parameter {name!r}")
        seen.add(name)


@dataclass(frozen=True)
class Product:
    """Source-attributed record of one purchasable component, fully normalized."""

    id: str
    manufacturer_id: str
    sku: str
    display_name: str
    category: str
    parameters: tuple[Parameter, ...]
    revision: int
    first_seen: datetime
    last_seen: datetime
    stale: bool = False

    def __post_init__(self):
        if self.id != f"{self.manufacturer_id}/{self.sku}":
            raise ModelError(f"product id must be manufacturer_id/sku, got {self.id!r}")
        if not self.sku:
            raise ModelError("sku must be non-empty")
        if self.revision < 1:
            raise ModelError("revision must be >= 1")
        _check_unique_names(self.parameters, f"product {self.id}")

    def parameter(self, name: str) -> Parameter | None:
        for param in self.parameters:
            if param.canonical_name.name == name:
                return param
        return None

    def content_key(self) -> tuple:
        """Normalized content identity; a change here is what bumps the revision."""
        return (
            self.display_name,
            self.category,
            tuple((p.canonical_name.name, p.value, p.raw_name, p.raw_value, p.raw_unit) for p in self.parameters),
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "manufacturer_id": self.manufacturer_id,
            "sku": self.sku,
            "name": self.display_name,
            "category": self.category,
            "parameters": [p.to_dict() for p in self.parameters],
            "revision": self.revision,
            "first_seen": format_ts(self.first_seen),
            "last_seen": format_ts(self.last_seen),
            "stale": self.stale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Product":
        return cls(
            id=data["id"],
            manufacturer_id=data["manufacturer_id"],
            sku=data["sku"],
            display_name=data["name"],
            category=data["category"],
            parameters=tuple(Parameter.from_dict(p) for p in data["parameters"]),
            revision=int(data["revision"]),
            first_seen=parse_ts(data["first_seen"]),
            last_seen=parse_ts(data["last_seen"]),
            stale=bool(data["stale"]),
        )


@dataclass(frozen=True)
class EquipmentParameter:
    """One target value on an Equipment; normalized to the canonical unit on construction."""

    name: CanonicalParameterName
    value: ParameterValue
    unit: Unit | None = None
    uncertainty: Decimal | None = None

    def __post_init__(self):
        where = f"equipment parameter {self.name.name!r}"
        value, unit = canonicalize_entry(self.name, self.value, self.unit, where)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "unit", unit)
        if self.uncertainty is not None and (not self.uncertainty.is_finite() or self.uncertainty < 0):
            raise ModelError(f"{where}: uncertainty must be a finite fraction >= 0")

    def to_dict(self) -> dict:
        out: dict = {"name": self.name.name, "value": self.value.render()}
        if self.unit is not None:
            out["unit"] = self.unit.symbol
        if self.value.approximate:
            out["approximate"] = True
        if self.uncertainty is not None:
            out["uncertainty"] = dec_str(self.uncertainty)
        return out


@dataclass(frozen=True)
class Equipment:
    """Client-side component specification, decoupled from any stored product."""

    name: str
    parameters: tuple[EquipmentParameter, ...] = ()
    derived_from: str | None = None

    def __post_init__(self):
        _check_unique_names(self.parameters, f"equipment {self.name!r}")

    def parameter(self, name: str) -> EquipmentParameter | None:
        for entry in self.parameters:
            if entry.name.name == name:
                return entry
        return None

    def with_parameter(self, entry: EquipmentParameter) -> "Equipment":
        """Replace or append one entry, returning a new Equipment."""
        out = []
        replaced = False
        for existing in self.parameters:
            if existing.name.name == entry.name.name:
                out.append(entry)
                replaced = True
            else:
                out.append(existing)
        if not replaced:
            out.append(entry)
        return replace(self, parameters=tuple(out))

    def to_dict(self) -> dict:
        out: dict = {"name": self.name, "parameters": [p.to_dict() for p in self.parameters]}
        if self.derived_from is not None:
            out["derived_from"] = self.derived_from
        return out


def equipment_from_product(product: Product) -> Equipment:
    """Create a fresh Equipment carrying the product's values, with provenance.

    The result shares nothing mutable with the product: later edits to the
    Equipment can never affect the stored product.
    """
    entries = tuple(
        EquipmentParameter(name=p.canonical_name, value=p.value, unit=p.unit, uncertainty=None)
        for p in product.parameters
    )
    return Equipment(name=product.display_name, parameters=entries, derived_from=product.id)


def apply_product_to_equipment(equipment: Equipment, product: Product) -> Equipment:
    """Take over every product value into the equipment.

    Entries present in the product overwrite (or insert into) the equipment,
    clearing any uncertainty they carried; entries with no counterpart in the
    product are preserved as-is.
    """
    from_product = {p.canonical_name.name: p for p in product.parameters}
    out: list[EquipmentParameter] = []
    for entry in equipment.parameters:
        incoming = from_product.pop(entry.name.name, None)
        if incoming is not None:
            out.append(EquipmentParameter(incoming.canonical_name, incoming.value, incoming.unit, None))
        else:
            out.append(entry)
    for p in product.parameters:
        if p.canonical_name.name in from_product:
            out.append(EquipmentParameter(p.canonical_name, p.value, p.unit, None))
    return Equipment(name=equipment.name, parameters=tuple(out), derived_from=product.id)
