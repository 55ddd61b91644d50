"""Faceted search over structured scholarly contributions.

Contributions ingest from line-delimited JSON into immutable snapshots,
align into tabular comparisons, grow facets inferred from the value kinds
present, and filter through a typed expression algebra. Taxonomic facets
resolve entity hierarchies live against an external knowledge graph
(fixture-backed or remote), and filtered subsets persist behind shareable
permalinks.
"""

from .comparison import Comparison, PropertyColumn, build_comparison
from .errors import KgFacetsError
from .facets import (
    FacetKind,
    FacetSpec,
    TaxonomyLevel,
    candidate_values,
    facet_values_at_level,
    infer_facets,
)
from .filters import (
    CategoricalIn,
    FilterSet,
    NumericCompare,
    NumericExclude,
    NumericRange,
    TaxonomicUnder,
    TemporalAfter,
    TemporalBefore,
    TemporalInterval,
    TemporalOn,
    apply_filters,
    match_value,
    validate_filters,
)
from .permalinks import Permalink, PermalinkJournal
from .store import Contribution, Paper, Statement, StoreSnapshot, ingest_dataset
from .taxonomy import (
    AncestorChain,
    CachingProvider,
    FixtureProvider,
    HierarchyProvider,
    RemoteProvider,
    TaxonomyNode,
    is_under,
    resolve_chain,
    resolve_many,
)
from .values import (
    DateValue,
    EntityValue,
    ExternalLink,
    QuantityValue,
    TextValue,
    Value,
)

__version__ = "0.1.0"

__all__ = [
    "AncestorChain",
    "CachingProvider",
    "CategoricalIn",
    "Comparison",
    "Contribution",
    "DateValue",
    "EntityValue",
    "ExternalLink",
    "FacetKind",
    "FacetSpec",
    "FilterSet",
    "FixtureProvider",
    "HierarchyProvider",
    "KgFacetsError",
    "NumericCompare",
    "NumericExclude",
    "NumericRange",
    "Paper",
    "Permalink",
    "PermalinkJournal",
    "PropertyColumn",
    "QuantityValue",
    "RemoteProvider",
    "Statement",
    "StoreSnapshot",
    "TaxonomicUnder",
    "TaxonomyLevel",
    "TaxonomyNode",
    "TemporalAfter",
    "TemporalBefore",
    "TemporalInterval",
    "TemporalOn",
    "TextValue",
    "Value",
    "apply_filters",
    "build_comparison",
    "candidate_values",
    "facet_values_at_level",
    "infer_facets",
    "ingest_dataset",
    "is_under",
    "match_value",
    "resolve_chain",
    "resolve_many",
    "validate_filters",
]
