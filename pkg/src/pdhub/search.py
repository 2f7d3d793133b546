"""Tolerance search: match equipment-style criteria against the product catalog.

A numeric criterion with target v and uncertainty fraction u accepts product
values x with |x - v| <= u * |v| (an absolute floor replaces |v| when the
target is exactly zero). Categorical criteria are exact label matches.
Matches are ranked by the arithmetic mean of per-criterion distances, so
scores stay comparable across queries with different criterion counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable

from .model import (
    CanonicalParameterName,
    Equipment,
    ModelError,
    ParameterValue,
    Product,
    Unit,
    canonicalize_entry,
)

#: Absolute tolerance floor (in canonical units) when a criterion targets exactly 0.
ZERO_TARGET_FLOOR = Decimal("1E-9")

_ZERO = Decimal(0)
_ONE = Decimal(1)


@dataclass(frozen=True)
class Criterion:
    """One search constraint; the target is normalized to canonical units on construction."""

    name: CanonicalParameterName
    target: ParameterValue
    unit: Unit | None = None
    uncertainty: Decimal | None = None

    def __post_init__(self):
        where = f"criterion {self.name.name!r}"
        target, unit = canonicalize_entry(self.name, self.target, self.unit, where)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "unit", unit)
        if self.uncertainty is not None and (not self.uncertainty.is_finite() or self.uncertainty < 0):
            raise ModelError(f"{where}: uncertainty must be a finite fraction >= 0")


@dataclass(frozen=True)
class SearchQuery:
    criteria: tuple[Criterion, ...] = ()
    default_uncertainty: Decimal = _ZERO
    category: str | None = None
    allow_missing: bool = False
    include_stale: bool = False
    limit: int | None = None

    def __post_init__(self):
        seen: set[str] = set()
        for criterion in self.criteria:
            if criterion.name.name in seen:
                raise ModelError(f"duplicate criterion {criterion.name.name!r}")
            seen.add(criterion.name.name)
        if not self.default_uncertainty.is_finite() or self.default_uncertainty < 0:
            raise ModelError("default_uncertainty must be a finite fraction >= 0")
        if self.limit is not None and self.limit < 0:
            raise ModelError("limit must be >= 0")

    def effective_uncertainty(self, criterion: Criterion) -> Decimal:
        return criterion.uncertainty if criterion.uncertainty is not None else self.default_uncertainty


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    distances: dict[str, Decimal] = field(default_factory=dict)


@dataclass(frozen=True)
class RankedMatch:
    product_id: str
    score: Decimal
    distances: dict[str, Decimal]


@dataclass(frozen=True)
class SearchResult:
    ranked: tuple[RankedMatch, ...]
    total_matches: int


def query_from_equipment(
    equipment: Equipment,
    default_uncertainty: Decimal = _ZERO,
    category: str | None = None,
    allow_missing: bool = False,
    include_stale: bool = False,
    limit: int | None = None,
) -> SearchQuery:
    """Build the query that searches products fitting an equipment specification."""
    criteria = tuple(
        Criterion(name=p.name, target=p.value, unit=p.unit, uncertainty=p.uncertainty)
        for p in equipment.parameters
    )
    return SearchQuery(
        criteria=criteria,
        default_uncertainty=default_uncertainty,
        category=category,
        allow_missing=allow_missing,
        include_stale=include_stale,
        limit=limit,
    )


def matches(query: SearchQuery, product: Product) -> MatchResult:
    """Evaluate all criteria against one product; distances are defined for matches."""
    distances: dict[str, Decimal] = {}
    for criterion in query.criteria:
        parameter = product.parameter(criterion.name.name)
        if parameter is None:
            if not query.allow_missing:
                return MatchResult(False)
            distances[criterion.name.name] = _ONE
            continue

        if criterion.target.label is not None:
            if parameter.value.label != criterion.target.label:
                return MatchResult(False)
            distances[criterion.name.name] = _ZERO
            continue

        target = criterion.target.numeric
        value = parameter.value.numeric
        assert target is not None and value is not None  # kinds align by canonical name
        uncertainty = query.effective_uncertainty(criterion)
        diff = abs(value - target)
        if uncertainty == 0:
            if diff != 0:
                return MatchResult(False)
            distances[criterion.name.name] = _ZERO
            continue
        tolerance = uncertainty * (abs(target) if target != 0 else ZERO_TARGET_FLOOR)
        if diff > tolerance:
            return MatchResult(False)
        distances[criterion.name.name] = _ZERO if diff == 0 else diff / tolerance
    return MatchResult(True, distances)


def score_of(distances: dict[str, Decimal]) -> Decimal:
    if not distances:
        return _ZERO
    return sum(distances.values(), _ZERO) / Decimal(len(distances))


def search(query: SearchQuery, catalog: Iterable[Product]) -> SearchResult:
    """Rank all matching products: ascending mean distance, ties by product id."""
    hits: list[RankedMatch] = []
    for product in catalog:
        if product.stale and not query.include_stale:
            continue
        if query.category is not None and product.category != query.category:
            continue
        result = matches(query, product)
        if not result.matched:
            continue
        hits.append(RankedMatch(product.id, score_of(result.distances), result.distances))
    hits.sort(key=lambda h: (h.score, h.product_id))
    total = len(hits)
    if query.limit is not None:
        hits = hits[: query.limit]
    return SearchResult(ranked=tuple(hits), total_matches=total)
