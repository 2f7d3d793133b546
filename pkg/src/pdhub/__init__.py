"""Product data hub: one normalized catalog for heterogeneous vendor feeds."""

from .model import (
    CANONICAL_PARAMETERS,
    KILOGRAM,
    LOCAL_MANUFACTURER_ID,
    METRE,
    CanonicalParameterName,
    Equipment,
    EquipmentParameter,
    Manufacturer,
    ModelError,
    Parameter,
    ParameterValue,
    Product,
    QuantityKind,
    SourceStatus,
    Unit,
    apply_product_to_equipment,
    canonical_name,
    equipment_from_product,
    label_value,
    numeric_value,
)
from .search import Criterion, SearchQuery, SearchResult, matches, query_from_equipment, search
from .store import Store, StoreSnapshot, UpsertOutcome
from .vocab import RawRecord, VocabularyRegistry, convert, default_registry, parse_value_string

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_PARAMETERS",
    "KILOGRAM",
    "LOCAL_MANUFACTURER_ID",
    "METRE",
    "CanonicalParameterName",
    "Criterion",
    "Equipment",
    "EquipmentParameter",
    "Manufacturer",
    "ModelError",
    "Parameter",
    "ParameterValue",
    "Product",
    "QuantityKind",
    "RawRecord",
    "SearchQuery",
    "SearchResult",
    "SourceStatus",
    "Store",
    "StoreSnapshot",
    "Unit",
    "UpsertOutcome",
    "VocabularyRegistry",
    "apply_product_to_equipment",
    "canonical_name",
    "convert",
    "default_registry",
    "equipment_from_product",
    "label_value",
    "matches",
    "numeric_value",
    "parse_value_string",
    "query_from_equipment",
    "search",
]
