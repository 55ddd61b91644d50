"""Typed filter expressions and their evaluation over comparisons.

Boolean structure: AND across properties, AND across the expressions listed
for one property, OR inside an expression's selected set (a categorical
selection matches any of its strings, a taxonomic selection any of its
ancestors). A row survives when, for every filtered property, at least one
of its values satisfies all of that property's expressions; rows missing a
filtered property are excluded, because a filter states a positive
requirement.

Matching rules per value kind:

* categorical selections compare display strings case-insensitively, so
  they work on any value kind;
* numeric comparisons, ranges and exclusions apply to quantity magnitudes
  only (units are never converted -- mixed-unit columns compare raw
  magnitudes and are flagged in their facet);
* ``on`` matches dates whose covering range contains the day, ``before``
  dates ending strictly before it, ``after`` dates starting strictly after
  it, and intervals match when closed ranges overlap;
* taxonomic selections match entities whose ancestor chain (self included)
  contains any selected ancestor.

The JSON form of a filter set is the wire contract shared with the HTTP API
and the web UI; see docs/formats.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from decimal import Decimal
from typing import Any, Iterable, Mapping, Union

from .comparison import Comparison
from .errors import (
    FilterValidationError,
    KindMismatch,
    MalformedFilter,
    ProviderUnavailable,
    UnknownProperty,
)
from .facets import FacetKind, FacetSpec, TaxonomyLevel
from .taxonomy import MAX_CHAIN_DEPTH, AncestorChain, HierarchyProvider, resolve_many
from .values import (
    DateValue,
    EntityValue,
    QuantityValue,
    Value,
    parse_date_bounds,
    parse_decimal,
)


@dataclass(frozen=True)
class CategoricalIn:
    """Match values whose display string equals any selected string."""

    values: frozenset[str]

    def __post_init__(self) -> None:
        if not self.values:
            raise MalformedFilter("categorical selection cannot be empty")
        object.__setattr__(self, "_lowered", frozenset(v.lower() for v in self.values))


NUMERIC_OPS = ("<", "<=", ">", ">=", "=", "!=")


@dataclass(frozen=True)
class NumericCompare:
    op: str
    bound: Decimal

    def __post_init__(self) -> None:
        if self.op not in NUMERIC_OPS:
            raise MalformedFilter(f"unknown numeric operator {self.op!r}")


@dataclass(frozen=True)
class NumericRange:
    low: Decimal
    high: Decimal
    low_inclusive: bool = True
    high_inclusive: bool = True

    def __post_init__(self) -> None:
        if self.low > self.high:
            raise MalformedFilter(f"numeric range low {self.low} exceeds high {self.high}")


@dataclass(frozen=True)
class NumericExclude:
    values: frozenset[Decimal]


@dataclass(frozen=True)
class TemporalOn:
    day: date


@dataclass(frozen=True)
class TemporalBefore:
    day: date


@dataclass(frozen=True)
class TemporalAfter:
    day: date


@dataclass(frozen=True)
class TemporalInterval:
    start: date
    end: date

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise MalformedFilter(f"interval start {self.start} is after end {self.end}")


@dataclass(frozen=True)
class AncestorRef:
    external_id: str
    label: str | None = None
    graph: str | None = None

    def __post_init__(self) -> None:
        if not self.external_id:
            raise MalformedFilter("taxonomic ancestor needs an external id")


@dataclass(frozen=True)
class TaxonomicUnder:
    """Match entities under (or equal to) any of the selected ancestors."""

    ancestors: tuple[AncestorRef, ...]
    level: TaxonomyLevel | None = None

    def __post_init__(self) -> None:
        if not self.ancestors:
            raise MalformedFilter("taxonomic selection cannot be empty")
        ordered = tuple(sorted(self.ancestors, key=lambda a: a.external_id))
        object.__setattr__(self, "ancestors", ordered)


FilterExpr = Union[
    CategoricalIn,
    NumericCompare,
    NumericRange,
    NumericExclude,
    TemporalOn,
    TemporalBefore,
    TemporalAfter,
    TemporalInterval,
    TaxonomicUnder,
]

_NUMERIC_EXPRS = (NumericCompare, NumericRange, NumericExclude)
_TEMPORAL_EXPRS = (TemporalOn, TemporalBefore, TemporalAfter, TemporalInterval)


@dataclass(frozen=True)
class FilterSet:
    """Conjunction across properties of per-property expression lists."""

    by_property: Mapping[str, tuple[FilterExpr, ...]]

    @classmethod
    def of(cls, mapping: Mapping[str, Iterable[FilterExpr]] | None = None) -> "FilterSet":
        return cls({pid: tuple(exprs) for pid, exprs in (mapping or {}).items()})

    @classmethod
    def empty(cls) -> "FilterSet":
        return cls({})

    def is_empty(self) -> bool:
        return not any(self.by_property.values())

    def items(self):
        return self.by_property.items()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FilterSet):
            return NotImplemented
        return dict(self.by_property) == dict(other.by_property)

    def __hash__(self) -> int:
        return hash(frozenset((pid, exprs) for pid, exprs in self.by_property.items()))


# ---------------------------------------------------------------------------
# Validation against facet kinds


def _expr_facet_kinds(expr: FilterExpr) -> tuple[FacetKind, ...]:
    if isinstance(expr, CategoricalIn):
        return (FacetKind.CATEGORICAL,)
    if isinstance(expr, _NUMERIC_EXPRS):
        return (FacetKind.NUMERIC,)
    if isinstance(expr, _TEMPORAL_EXPRS):
        return (FacetKind.TEMPORAL,)
    return (FacetKind.TAXONOMIC,)


def validate_filters(
    filter_set: FilterSet,
    facets: Iterable[FacetSpec],
    *,
    allow_categorical_on_taxonomic: bool = False,
) -> FilterSet:
    """Check every expression's kind against its property's facet kind.

    Returns the set unchanged when compatible; otherwise raises a
    ``FilterValidationError`` naming every mismatch and unknown property.
    ``allow_categorical_on_taxonomic`` admits the degradation fallback, where
    a taxonomic column is filtered by plain label selection.
    """
    kinds = {facet.property_id: facet.kind for facet in facets}
    problems: list[KindMismatch | UnknownProperty] = []
    for property_id, exprs in filter_set.items():
        facet_kind = kinds.get(property_id)
        if facet_kind is None:
            problems.append(UnknownProperty(property_id))
            continue
        for expr in exprs:
            allowed = _expr_facet_kinds(expr)
            if (
                allow_categorical_on_taxonomic
                and facet_kind == FacetKind.TAXONOMIC
                and isinstance(expr, CategoricalIn)
            ):
                continue
            if facet_kind not in allowed:
                problems.append(
                    KindMismatch(property_id, expected=facet_kind.value, got=allowed[0].value)
                )
    if problems:
        raise FilterValidationError(problems)
    return filter_set


# ---------------------------------------------------------------------------
# Matching


_OP_TABLE = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _satisfies(
    value: Value,
    expr: FilterExpr,
    chains: Mapping[str, AncestorChain] | None,
    degraded: bool,
) -> bool:
    """Kind-incompatible pairs simply do not match; no exception here."""
    if isinstance(expr, CategoricalIn):
        return value.display().lower() in expr._lowered
    if isinstance(expr, NumericCompare):
        if not isinstance(value, QuantityValue):
            return False
        return _OP_TABLE[expr.op](value.magnitude, expr.bound)
    if isinstance(expr, NumericRange):
        if not isinstance(value, QuantityValue):
            return False
        m = value.magnitude
        low_ok = m >= expr.low if expr.low_inclusive else m > expr.low
        high_ok = m <= expr.high if expr.high_inclusive else m < expr.high
        return low_ok and high_ok
    if isinstance(expr, NumericExclude):
        if not isinstance(value, QuantityValue):
            return False
        return value.magnitude not in expr.values
    if isinstance(expr, TemporalOn):
        if not isinstance(value, DateValue):
            return False
        return value.start <= expr.day <= value.end
    if isinstance(expr, TemporalBefore):
        if not isinstance(value, DateValue):
            return False
        return value.end < expr.day
    if isinstance(expr, TemporalAfter):
        if not isinstance(value, DateValue):
            return False
        return value.start > expr.day
    if isinstance(expr, TemporalInterval):
        if not isinstance(value, DateValue):
            return False
        return value.start <= expr.end and expr.start <= value.end
    if isinstance(expr, TaxonomicUnder):
        if not isinstance(value, EntityValue):
            return False
        return _under_any(value, expr, chains, degraded)
    raise TypeError(f"unknown filter expression {type(expr).__name__}")


def _under_any(
    value: EntityValue,
    expr: TaxonomicUnder,
    chains: Mapping[str, AncestorChain] | None,
    degraded: bool,
) -> bool:
    external_id = value.link.external_id if value.link else None
    for ancestor in expr.ancestors:
        # Self-match needs no chain.
        if external_id is not None and external_id == ancestor.external_id:
            return True
        if degraded:
            # Fallback when the hierarchy is unreachable: the facet became
            # categorical-on-labels, so ancestry degrades to label equality.
            if ancestor.label and value.entity_id.lower() == ancestor.label.lower():
                return True
            continue
        if external_id is not None and chains is not None:
            chain = chains.get(external_id)
            if chain is not None and chain.contains(ancestor.external_id):
                return True
    return False


def match_value(
    value: Value,
    expr: FilterExpr,
    provider: HierarchyProvider | None = None,
    *,
    max_depth: int = MAX_CHAIN_DEPTH,
) -> bool:
    """Evaluate one value against one expression.

    Unlike bulk evaluation, an incompatible kind is an error here (except
    for categorical selections, which accept every kind via its display
    string).
    """
    if isinstance(expr, _NUMERIC_EXPRS) and not isinstance(value, QuantityValue):
        raise KindMismatch("<value>", expected="quantity", got=type(value).__name__)
    if isinstance(expr, _TEMPORAL_EXPRS) and not isinstance(value, DateValue):
        raise KindMismatch("<value>", expected="date", got=type(value).__name__)
    if isinstance(expr, TaxonomicUnder):
        if not isinstance(value, EntityValue):
            raise KindMismatch("<value>", expected="entity", got=type(value).__name__)
        chains: dict[str, AncestorChain] = {}
        if value.link and provider is not None and value.link.graph == provider.graph:
            needs_chain = any(a.external_id != value.link.external_id for a in expr.ancestors)
            if needs_chain:
                outcome = resolve_many(provider, [value], max_depth=max_depth)[value.link.external_id]
                if isinstance(outcome, ProviderUnavailable):
                    raise outcome
                if isinstance(outcome, AncestorChain):
                    chains[value.link.external_id] = outcome
        return _under_any(value, expr, chains, degraded=False)
    return _satisfies(value, expr, None, degraded=False)


def apply_filters(
    comparison: Comparison,
    filter_set: FilterSet,
    provider: HierarchyProvider | None = None,
    *,
    degradation_enabled: bool = False,
    max_depth: int = MAX_CHAIN_DEPTH,
) -> list[str]:
    """Ids of the rows surviving the filter set, in comparison row order.

    Taxonomic expressions resolve every referenced leaf's chain through the
    provider once per call. When the provider is unavailable the behavior is
    configuration-controlled: with degradation enabled taxonomic matching
    falls back to label equality, otherwise ``ProviderUnavailable``
    propagates.
    """
    survivors, _ = apply_filters_detailed(
        comparison,
        filter_set,
        provider,
        degradation_enabled=degradation_enabled,
        max_depth=max_depth,
    )
    return survivors


def apply_filters_detailed(
    comparison: Comparison,
    filter_set: FilterSet,
    provider: HierarchyProvider | None = None,
    *,
    degradation_enabled: bool = False,
    max_depth: int = MAX_CHAIN_DEPTH,
) -> tuple[list[str], bool]:
    """Like :func:`apply_filters` but also reports whether matching degraded."""
    active = [(pid, exprs) for pid, exprs in filter_set.items() if exprs]
    if not active:
        return list(comparison.contribution_ids), False

    taxonomic_properties = [
        pid
        for pid, exprs in active
        if any(isinstance(expr, TaxonomicUnder) for expr in exprs)
    ]
    chains: dict[str, AncestorChain] = {}
    degraded = False
    if taxonomic_properties:
        chains, degraded = _resolve_chains_for(
            comparison,
            taxonomic_properties,
            provider,
            degradation_enabled=degradation_enabled,
            max_depth=max_depth,
        )

    survivors = []
    for cid in comparison.contribution_ids:
        keep = True
        for property_id, exprs in active:
            values = comparison.values_for(cid, property_id)
            if not values or not any(
                all(_satisfies(value, expr, chains, degraded) for expr in exprs)
                for value in values
            ):
                keep = False
                break
        if keep:
            survivors.append(cid)
    return survivors, degraded


def _resolve_chains_for(
    comparison: Comparison,
    property_ids: list[str],
    provider: HierarchyProvider | None,
    *,
    degradation_enabled: bool,
    max_depth: int,
) -> tuple[dict[str, AncestorChain], bool]:
    if provider is None:
        if degradation_enabled:
            return {}, True
        raise ProviderUnavailable("no provider configured", property_id=property_ids[0])

    refs = []
    seen: set[str] = set()
    for property_id in property_ids:
        for values in comparison.column_values(property_id).values():
            for value in values:
                if (
                    isinstance(value, EntityValue)
                    and value.link
                    and value.link.graph == provider.graph
                    and value.link.external_id not in seen
                ):
                    seen.add(value.link.external_id)
                    refs.append(value)

    outcomes = resolve_many(provider, refs, max_depth=max_depth)
    chains: dict[str, AncestorChain] = {}
    for external_id, outcome in outcomes.items():
        if isinstance(outcome, AncestorChain):
            chains[external_id] = outcome
        elif isinstance(outcome, ProviderUnavailable):
            if degradation_enabled:
                return {}, True
            raise ProviderUnavailable(outcome.cause, property_id=property_ids[0])
        # Unknown entities and degenerate chains leave the value chainless:
        # it can then only self-match.
    return chains, False


# ---------------------------------------------------------------------------
# JSON codec (wire contract shared with the HTTP API and the web UI)


def expr_to_json(expr: FilterExpr) -> dict[str, Any]:
    if isinstance(expr, CategoricalIn):
        return {"type": "categorical_in", "values": sorted(expr.values)}
    if isinstance(expr, NumericCompare):
        return {"type": "numeric_cmp", "op": expr.op, "bound": str(expr.bound)}
    if isinstance(expr, NumericRange):
        return {
            "type": "numeric_range",
            "low": str(expr.low),
            "high": str(expr.high),
            "low_inclusive": expr.low_inclusive,
            "high_inclusive": expr.high_inclusive,
        }
    if isinstance(expr, NumericExclude):
        return {"type": "numeric_exclude", "values": sorted(str(v) for v in expr.values)}
    if isinstance(expr, TemporalOn):
        return {"type": "temporal_on", "date": expr.day.isoformat()}
    if isinstance(expr, TemporalBefore):
        return {"type": "temporal_before", "date": expr.day.isoformat()}
    if isinstance(expr, TemporalAfter):
        return {"type": "temporal_after", "date": expr.day.isoformat()}
    if isinstance(expr, TemporalInterval):
        return {
            "type": "temporal_interval",
            "start": expr.start.isoformat(),
            "end": expr.end.isoformat(),
        }
    if isinstance(expr, TaxonomicUnder):
        payload: dict[str, Any] = {
            "type": "taxonomic_under",
            "ancestors": [
                {"external_id": a.external_id, "label": a.label, "graph": a.graph}
                for a in expr.ancestors
            ],
        }
        if expr.level is not None:
            payload["level"] = expr.level.value
        return payload
    raise TypeError(f"unknown filter expression {type(expr).__name__}")


def _parse_day(obj: dict[str, Any], key: str, path: str) -> date:
    raw = obj.get(key)
    if not isinstance(raw, str):
        raise MalformedFilter(f"{key!r} must be an ISO date string", path)
    lo, hi = _date_bounds_or_error(raw, path)
    if lo != hi:
        raise MalformedFilter(f"{key!r} must name a single day, got {raw!r}", path)
    return lo


def _date_bounds_or_error(raw: str, path: str) -> tuple[date, date]:
    try:
        return parse_date_bounds(raw)
    except Exception:
        raise MalformedFilter(f"not an ISO date: {raw!r}", path) from None


def _parse_bound(obj: dict[str, Any], key: str, path: str) -> Decimal:
    if key not in obj:
        raise MalformedFilter(f"missing {key!r}", path)
    try:
        return parse_decimal(obj[key])
    except Exception:
        raise MalformedFilter(f"{key!r} must be numeric, got {obj[key]!r}", path) from None


def expr_from_json(obj: Any, path: str = "$") -> FilterExpr:
    if not isinstance(obj, dict):
        raise MalformedFilter("filter expression must be an object", path)
    tag = obj.get("type")
    try:
        if tag == "categorical_in":
            values = obj.get("values")
            if not isinstance(values, list) or any(not isinstance(v, str) for v in values):
                raise MalformedFilter("'values' must be a list of strings", path)
            return CategoricalIn(frozenset(values))
        if tag == "numeric_cmp":
            op = obj.get("op")
            if not isinstance(op, str):
                raise MalformedFilter("'op' must be a string", path)
            return NumericCompare(op, _parse_bound(obj, "bound", path))
        if tag == "numeric_range":
            return NumericRange(
                low=_parse_bound(obj, "low", path),
                high=_parse_bound(obj, "high", path),
                low_inclusive=bool(obj.get("low_inclusive", True)),
                high_inclusive=bool(obj.get("high_inclusive", True)),
            )
        if tag == "numeric_exclude":
            values = obj.get("values")
            if not isinstance(values, list):
                raise MalformedFilter("'values' must be a list", path)
            parsed = []
            for v in values:
                try:
                    parsed.append(parse_decimal(v))
                except Exception:
                    raise MalformedFilter(f"excluded value must be numeric, got {v!r}", path) from None
            return NumericExclude(frozenset(parsed))
        if tag == "temporal_on":
            return TemporalOn(_parse_day(obj, "date", path))
        if tag == "temporal_before":
            return TemporalBefore(_parse_day(obj, "date", path))
        if tag == "temporal_after":
            return TemporalAfter(_parse_day(obj, "date", path))
        if tag == "temporal_interval":
            return TemporalInterval(
                start=_parse_day(obj, "start", path),
                end=_parse_day(obj, "end", path),
            )
        if tag == "taxonomic_under":
            ancestors_raw = obj.get("ancestors")
            if not isinstance(ancestors_raw, list):
                raise MalformedFilter("'ancestors' must be a list", path)
            ancestors = []
            for index, entry in enumerate(ancestors_raw):
                if not isinstance(entry, dict) or not isinstance(entry.get("external_id"), str):
                    raise MalformedFilter(
                        "each ancestor needs an 'external_id'", f"{path}.ancestors[{index}]"
                    )
                ancestors.append(
                    AncestorRef(
                        external_id=entry["external_id"],
                        label=entry.get("label"),
                        graph=entry.get("graph"),
                    )
                )
            level_raw = obj.get("level")
            level = None
            if level_raw is not None:
                try:
                    level = TaxonomyLevel(level_raw)
                except ValueError:
                    raise MalformedFilter(f"unknown level {level_raw!r}", path) from None
            return TaxonomicUnder(tuple(ancestors), level)
    except MalformedFilter:
        raise
    except Exception as exc:
        raise MalformedFilter(str(exc), path) from None
    raise MalformedFilter(f"unknown filter type {tag!r}", path)


def filter_set_to_json(filter_set: FilterSet) -> dict[str, Any]:
    return {
        property_id: [expr_to_json(expr) for expr in exprs]
        for property_id, exprs in sorted(filter_set.items())
    }


def filter_set_from_json(obj: Any, path: str = "$") -> FilterSet:
    if not isinstance(obj, dict):
        raise MalformedFilter("filter set must map property ids to expression lists", path)
    by_property: dict[str, tuple[FilterExpr, ...]] = {}
    for property_id, exprs_raw in obj.items():
        if not isinstance(exprs_raw, list):
            raise MalformedFilter("expressions must be a list", f"{path}.{property_id}")
        by_property[property_id] = tuple(
            expr_from_json(entry, f"{path}.{property_id}[{index}]")
            for index, entry in enumerate(exprs_raw)
        )
    return FilterSet(by_property)


def canonical_filter_json(filter_set: FilterSet) -> str:
    """Deterministic serialization: equal filter sets yield equal bytes."""
    return json.dumps(
        filter_set_to_json(filter_set), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    )


def describe_expr(expr: FilterExpr) -> str:
    """Short human-readable form used for applied-filter summaries."""
    if isinstance(expr, CategoricalIn):
        return "is one of: " + ", ".join(sorted(expr.values))
    if isinstance(expr, NumericCompare):
        return f"{expr.op} {expr.bound}"
    if isinstance(expr, NumericRange):
        left = "[" if expr.low_inclusive else "("
        right = "]" if expr.high_inclusive else ")"
        return f"in {left}{expr.low}, {expr.high}{right}"
    if isinstance(expr, NumericExclude):
        return "excludes " + ", ".join(str(v) for v in sorted(expr.values))
    if isinstance(expr, TemporalOn):
        return f"on {expr.day.isoformat()}"
    if isinstance(expr, TemporalBefore):
        return f"before {expr.day.isoformat()}"
    if isinstance(expr, TemporalAfter):
        return f"after {expr.day.isoformat()}"
    if isinstance(expr, TemporalInterval):
        return f"{expr.start.isoformat()} to {expr.end.isoformat()}"
    if isinstance(expr, TaxonomicUnder):
        names = ", ".join(a.label or a.external_id for a in expr.ancestors)
        suffix = f" ({expr.level.value} level)" if expr.level else ""
        return f"under {names}{suffix}"
    raise TypeError(f"unknown filter expression {type(expr).__name__}")
