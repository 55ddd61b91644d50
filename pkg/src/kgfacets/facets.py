"""Dynamic facet inference and candidate-value aggregation.

Facets are not predefined: each comparison column gets a facet whose kind is
inferred from the value kinds actually present. A column is numeric,
temporal or taxonomic when more than half of its values are quantities,
dates, or externally-linked entities respectively; anything else falls back
to a categorical facet over display strings. Taxonomic facets can be
aggregated at a chosen granularity level by resolving each leaf's ancestor
chain through a hierarchy provider.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from datetime import date
from decimal import Decimal
from enum import Enum
from typing import Union

from .comparison import Comparison
from .errors import ProviderUnavailable, WrongFacetKind
from .taxonomy import (
    MAX_CHAIN_DEPTH,
    AncestorChain,
    HierarchyProvider,
    resolve_many,
)
from .values import (
    DateValue,
    EntityValue,
    QuantityValue,
    Value,
)

DEFAULT_HIERARCHY_GRAPHS = frozenset({"geonames"})
DEFAULT_CANDIDATE_CAP = 50
UNCLASSIFIED_LABEL = "(unclassified)"


class FacetKind(str, Enum):
    CATEGORICAL = "categorical"
    NUMERIC = "numeric"
    TEMPORAL = "temporal"
    TAXONOMIC = "taxonomic"


class TaxonomyLevel(str, Enum):
    """Granularity levels for taxonomic facets, coarsest first."""

    CONTINENT = "continent"
    COUNTRY = "country"
    REGION = "region"
    CITY = "city"
    LEAF = "leaf"

    @property
    def rank(self) -> int:
        return _LEVEL_ORDER.index(self)

    def finer_than(self, other: "TaxonomyLevel") -> bool:
        return self.rank > other.rank


_LEVEL_ORDER = (
    TaxonomyLevel.CONTINENT,
    TaxonomyLevel.COUNTRY,
    TaxonomyLevel.REGION,
    TaxonomyLevel.CITY,
    TaxonomyLevel.LEAF,
)

# External feature codes that define the selectable levels; every other code
# participates only as a leaf or as chain interior.
FEATURE_CODE_LEVELS = {
    "CONT": TaxonomyLevel.CONTINENT,
    "PCLI": TaxonomyLevel.COUNTRY,
    "ADM1": TaxonomyLevel.REGION,
    "PPL": TaxonomyLevel.CITY,
}


@dataclass(frozen=True)
class CategoricalSummary:
    # (display string, count), count-descending then lexicographic
    values: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class NumericSummary:
    minimum: Decimal
    maximum: Decimal
    count: int
    units: tuple[str, ...]
    mixed_units: bool


@dataclass(frozen=True)
class TemporalSummary:
    earliest: date
    latest: date
    count: int


@dataclass(frozen=True)
class TaxonomicLeaf:
    label: str
    external_id: str | None
    graph: str | None
    count: int


@dataclass(frozen=True)
class TaxonomicSummary:
    leaves: tuple[TaxonomicLeaf, ...]
    levels: tuple[TaxonomyLevel, ...] = _LEVEL_ORDER


FacetSummary = Union[CategoricalSummary, NumericSummary, TemporalSummary, TaxonomicSummary]


@dataclass(frozen=True)
class FacetSpec:
    property_id: str
    label: str
    kind: FacetKind
    summary: FacetSummary
    degraded: bool = False


@dataclass(frozen=True)
class LevelBucket:
    label: str
    external_id: str | None
    count: int


def _column_facet(
    property_id: str,
    label: str,
    values: list[Value],
    hierarchy_graphs: frozenset[str],
) -> FacetSpec:
    total = len(values)
    quantities = [v for v in values if isinstance(v, QuantityValue)]
    if 2 * len(quantities) > total:
        units = sorted({v.unit for v in quantities if v.unit})
        distinct_units = {v.unit or "" for v in quantities}
        return FacetSpec(
            property_id,
            label,
            FacetKind.NUMERIC,
            NumericSummary(
                minimum=min(v.magnitude for v in quantities),
                maximum=max(v.magnitude for v in quantities),
                count=len(quantities),
                units=tuple(units),
                mixed_units=len(distinct_units) > 1,
            ),
        )

    dates = [v for v in values if isinstance(v, DateValue)]
    if 2 * len(dates) > total:
        return FacetSpec(
            property_id,
            label,
            FacetKind.TEMPORAL,
            TemporalSummary(
                earliest=min(v.start for v in dates),
                latest=max(v.end for v in dates),
                count=len(dates),
            ),
        )

    entities = [v for v in values if isinstance(v, EntityValue)]
    linked = [v for v in entities if v.link and v.link.graph in hierarchy_graphs]
    if 2 * len(linked) > total:
        leaf_counts = Counter(
            (
                v.entity_id,
                v.link.external_id if v.link else None,
                v.link.graph if v.link else None,
            )
            for v in entities
        )
        leaves = tuple(
            TaxonomicLeaf(label=key[0], external_id=key[1], graph=key[2], count=count)
            for key, count in sorted(leaf_counts.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1] or ""))
        )
        return FacetSpec(property_id, label, FacetKind.TAXONOMIC, TaxonomicSummary(leaves))

    display_counts = Counter(v.display() for v in values)
    return FacetSpec(
        property_id,
        label,
        FacetKind.CATEGORICAL,
        CategoricalSummary(
            tuple(sorted(display_counts.items(), key=lambda kv: (-kv[1], kv[0])))
        ),
    )


def infer_facets(
    comparison: Comparison,
    *,
    hierarchy_graphs: frozenset[str] = DEFAULT_HIERARCHY_GRAPHS,
) -> list[FacetSpec]:
    """One facet per column that holds at least one value.

    Pure and deterministic: no provider access, and row order never changes
    the result. Multi-valued cells contribute one count per value.
    """
    facets = []
    for column in comparison.columns:
        values: list[Value] = []
        for cell in comparison.column_values(column.property_id).values():
            values.extend(cell)
        if not values:
            continue
        facets.append(_column_facet(column.property_id, column.label, values, hierarchy_graphs))
    return facets


def candidate_values(
    facet: FacetSpec,
    *,
    prefix: str = "",
    limit: int = DEFAULT_CANDIDATE_CAP,
) -> tuple[list[tuple[str, int]], bool]:
    """Ranked (value, count) candidates for selection prompts.

    Case-insensitive prefix narrowing, count-descending rank, capped at
    ``limit`` with a truncation flag. Only categorical and taxonomic facets
    have enumerable candidates.
    """
    if facet.kind == FacetKind.CATEGORICAL:
        assert isinstance(facet.summary, CategoricalSummary)
        entries = list(facet.summary.values)
    elif facet.kind == FacetKind.TAXONOMIC:
        assert isinstance(facet.summary, TaxonomicSummary)
        merged: Counter[str] = Counter()
        for leaf in facet.summary.leaves:
            merged[leaf.label] += leaf.count
        entries = sorted(merged.items(), key=lambda kv: (-kv[1], kv[0]))
    else:
        raise WrongFacetKind(expected="categorical or taxonomic", got=facet.kind.value)

    if prefix:
        needle = prefix.lower()
        entries = [(value, count) for value, count in entries if value.lower().startswith(needle)]
    truncated = len(entries) > limit
    return entries[:limit], truncated


def _level_of(chain: AncestorChain, level: TaxonomyLevel) -> tuple[str, str] | None:
    for node in chain:
        if FEATURE_CODE_LEVELS.get(node.feature_code) == level:
            return node.label, node.external_id
    return None


def facet_values_at_level(
    facet: FacetSpec,
    level: TaxonomyLevel,
    provider: HierarchyProvider,
    *,
    max_depth: int = MAX_CHAIN_DEPTH,
) -> list[LevelBucket]:
    """Aggregate a taxonomic facet's leaves at the requested granularity.

    Each leaf maps to its chain's ancestor at ``level``; leaves without one
    (truncated chains, unlinked values, unknown entities) fall into the
    ``(unclassified)`` bucket so totals are conserved. An unavailable
    provider raises; it never yields a silently empty aggregation.
    """
    if facet.kind != FacetKind.TAXONOMIC:
        raise WrongFacetKind(expected="taxonomic", got=facet.kind.value)
    assert isinstance(facet.summary, TaxonomicSummary)
    leaves = facet.summary.leaves

    if level == TaxonomyLevel.LEAF:
        return [
            LevelBucket(leaf.label, leaf.external_id, leaf.count)
            for leaf in sorted(leaves, key=lambda l: (-l.count, l.label, l.external_id or ""))
        ]

    resolvable = [
        leaf.external_id
        for leaf in leaves
        if leaf.external_id and leaf.graph == provider.graph
    ]
    chains = resolve_many(provider, resolvable, max_depth=max_depth)
    for outcome in chains.values():
        if isinstance(outcome, ProviderUnavailable):
            raise outcome

    buckets: Counter[tuple[str, str | None]] = Counter()
    for leaf in leaves:
        ancestor: tuple[str, str] | None = None
        if leaf.external_id and leaf.graph == provider.graph:
            outcome = chains[leaf.external_id]
            if isinstance(outcome, AncestorChain):
                ancestor = _level_of(outcome, level)
        key = ancestor if ancestor else (UNCLASSIFIED_LABEL, None)
        buckets[key] += leaf.count

    classified = sorted(
        (
            (label, external_id, count)
            for (label, external_id), count in buckets.items()
            if label != UNCLASSIFIED_LABEL
        ),
        key=lambda entry: (-entry[2], entry[0]),
    )
    result = [LevelBucket(label, external_id, count) for label, external_id, count in classified]
    unclassified = buckets.get((UNCLASSIFIED_LABEL, None))
    if unclassified:
        result.append(LevelBucket(UNCLASSIFIED_LABEL, None, unclassified))
    return result


def degrade_to_categorical(facet: FacetSpec) -> FacetSpec:
    """Categorical-on-labels fallback for when the hierarchy is unreachable."""
    if facet.kind != FacetKind.TAXONOMIC:
        return facet
    assert isinstance(facet.summary, TaxonomicSummary)
    merged: Counter[str] = Counter()
    for leaf in facet.summary.leaves:
        merged[leaf.label] += leaf.count
    return replace(
        facet,
        kind=FacetKind.CATEGORICAL,
        summary=CategoricalSummary(tuple(sorted(merged.items(), key=lambda kv: (-kv[1], kv[0])))),
        degraded=True,
    )


def facet_payload(facet: FacetSpec) -> dict:
    """JSON object for the facets API; schema documented in docs/formats.md."""
    payload: dict = {
        "property_id": facet.property_id,
        "label": facet.label,
        "kind": facet.kind.value,
        "degraded": facet.degraded,
    }
    summary = facet.summary
    if isinstance(summary, CategoricalSummary):
        payload["values"] = [{"value": v, "count": c} for v, c in summary.values]
    elif isinstance(summary, NumericSummary):
        payload.update(
            {
                "minimum": str(summary.minimum),
                "maximum": str(summary.maximum),
                "count": summary.count,
                "units": list(summary.units),
                "mixed_units": summary.mixed_units,
            }
        )
    elif isinstance(summary, TemporalSummary):
        payload.update(
            {
                "earliest": summary.earliest.isoformat(),
                "latest": summary.latest.isoformat(),
                "count": summary.count,
            }
        )
    else:
        payload["leaves"] = [
            {
                "label": leaf.label,
                "external_id": leaf.external_id,
                "graph": leaf.graph,
                "count": leaf.count,
            }
            for leaf in summary.leaves
        ]
        payload["levels"] = [level.value for level in summary.levels]
    return payload
