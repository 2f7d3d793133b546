"""Independent reference implementations used to check the real ones.

Everything here is straight-line code over exact rational arithmetic
(fractions.Fraction), deliberately sharing nothing with the package's search
module beyond the public data types it judges.
"""

from __future__ import annotations

from fractions import Fraction

from pdhub.model import Product
from pdhub.search import SearchQuery

ZERO_FLOOR = Fraction(1, 10**9)


def oracle_match(query: SearchQuery, product: Product) -> dict[str, Fraction] | None:
    """Per-criterion distances if the product matches, else None."""
    distances: dict[str, Fraction] = {}
    for criterion in query.criteria:
        found = None
        for parameter in product.parameters:
            if parameter.canonical_name.name == criterion.name.name:
                found = parameter
        if found is None:
            if not query.allow_missing:
                return None
            distances[criterion.name.name] = Fraction(1)
            continue
        if criterion.target.label is not None:
            if found.value.label != criterion.target.label:
                return None
            distances[criterion.name.name] = Fraction(0)
            continue
        uncertainty = Fraction(
            criterion.uncertainty if criterion.uncertainty is not None else query.default_uncertainty
        )
        target = Fraction(criterion.target.numeric)
        value = Fraction(found.value.numeric)
        diff = abs(value - target)
        if uncertainty == 0:
            if diff != 0:
                return None
            distances[criterion.name.name] = Fraction(0)
            continue
        tolerance = uncertainty * (abs(target) if target != 0 else ZERO_FLOOR)
        if diff > tolerance:
            return None
        distances[criterion.name.name] = diff / tolerance
    return distances


def oracle_search(query: SearchQuery, catalog) -> list[tuple[str, Fraction, dict[str, Fraction]]]:
    """Linear scan + sort; returns (product_id, score, distances) rows in rank order."""
    rows = []
    for product in catalog:
        if product.stale and not query.include_stale:
            continue
        if query.category is not None and product.category != query.category:
            continue
        distances = oracle_match(query, product)
        if distances is None:
            continue
        if distances:
            score = sum(distances.values(), Fraction(0)) / len(distances)
        else:
            score = Fraction(0)
        rows.append((product.id, score, distances))
    rows.sort(key=lambda row: (row[1], row[0]))
    if query.limit is not None:
        rows = rows[: query.limit]
    return rows
