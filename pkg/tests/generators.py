"""Randomized comparisons, hierarchies and filter sets for property tests.

Filters are produced in their JSON wire form so the engine (through the
codec) and the naive oracle consume exactly the same input.
"""

from __future__ import annotations

import random
import string
from datetime import date, timedelta
from decimal import Decimal

from kgfacets.comparison import Comparison, PropertyColumn
from kgfacets.facets import FacetKind, FacetSpec, infer_facets
from kgfacets.taxonomy import TaxonomyNode
from kgfacets.values import DateValue, EntityValue, ExternalLink, QuantityValue, TextValue

WORDS = (
    "alpha beta gamma delta epsilon kappa lambda sigma omega survey cohort model "
    "baseline variant control sample field remote onsite pilot"
).split()
UNITS = (None, None, "1/day", "days", "mg/L")


def random_hierarchy(rng: random.Random, *, graph: str = "geonames") -> dict[str, dict]:
    """A complete four-level tree as raw node dicts (root has no parent)."""
    raw: dict[str, dict] = {"x-earth": {"id": "x-earth", "label": "Earth", "feature_code": "AREA"}}
    for c in range(rng.randint(2, 3)):
        cont = f"x-cont{c}"
        raw[cont] = {"id": cont, "label": f"Continent {c}", "feature_code": "CONT", "parent_id": "x-earth"}
        for k in range(rng.randint(2, 3)):
            country = f"{cont}-c{k}"
            raw[country] = {
                "id": country, "label": f"Country {c}.{k}", "feature_code": "PCLI", "parent_id": cont,
            }
            for r in range(rng.randint(1, 2)):
                region = f"{country}-r{r}"
                raw[region] = {
                    "id": region, "label": f"Region {c}.{k}.{r}", "feature_code": "ADM1", "parent_id": country,
                }
                for p in range(rng.randint(1, 3)):
                    city = f"{region}-p{p}"
                    raw[city] = {
                        "id": city, "label": f"City {c}.{k}.{r}.{p}", "feature_code": "PPL", "parent_id": region,
                    }
    return raw


def provider_nodes(raw: dict[str, dict]) -> dict[str, TaxonomyNode]:
    return {
        external_id: TaxonomyNode(
            external_id=external_id,
            label=obj["label"],
            feature_code=obj["feature_code"],
            parent_id=obj.get("parent_id"),
        )
        for external_id, obj in raw.items()
    }


class _ColumnPool:
    """Per-column value vocabulary so values repeat the way real data does."""

    def __init__(self, rng: random.Random, profile: str, raw: dict[str, dict], *, cities_only: bool, graph: str):
        self.profile = profile
        self.graph = graph
        self.words = rng.sample(WORDS, rng.randint(3, 6))
        center = rng.uniform(-20, 120)
        self.center, self.scale = center, rng.uniform(0.5, 15)
        self.window_start = date(2018, 1, 1) + timedelta(days=rng.randint(0, 1200))
        self.window_days = rng.randint(60, 240)
        if cities_only:
            candidates = [i for i, o in raw.items() if o["feature_code"] == "PPL"]
        else:
            candidates = [i for i in raw if i != "x-earth"]
        self.entities = rng.sample(candidates, min(len(candidates), rng.randint(3, 8)))
        self.allow_unlinked = not cities_only

    def value(self, rng: random.Random, raw: dict[str, dict]):
        kind = self.profile
        if kind == "mixed":
            kind = rng.choice(("text", "quantity", "date", "entity"))
        if kind == "text":
            return TextValue(rng.choice(self.words))
        if kind == "quantity":
            magnitude = Decimal(str(round(rng.gauss(self.center, self.scale), rng.randint(0, 2))))
            return QuantityValue(magnitude, rng.choice(UNITS))
        if kind == "date":
            base = self.window_start + timedelta(days=rng.randint(0, self.window_days))
            if rng.random() < 0.4:
                return DateValue(base, base + timedelta(days=rng.randint(1, 90)))
            return DateValue.point(base)
        external_id = rng.choice(self.entities)
        label = raw[external_id]["label"]
        if self.allow_unlinked and rng.random() < 0.05:
            return EntityValue(label)  # unlinked: can never prove ancestry
        return EntityValue(
            label,
            ExternalLink(graph=self.graph, external_id=external_id, url=f"https://geo.example.org/{external_id}"),
        )


def random_comparison(
    rng: random.Random,
    raw_hierarchy: dict[str, dict],
    *,
    max_rows: int = 1000,
    max_properties: int = 20,
    cities_only: bool = False,
    graph: str = "geonames",
) -> tuple[Comparison, dict[str, dict[str, list]]]:
    """Build a comparison plus the plain-dict view the oracle consumes."""
    n_rows = rng.randint(2, max_rows)
    n_props = rng.randint(2, max_properties)
    pools = [
        _ColumnPool(
            rng,
            rng.choice(("text", "quantity", "date", "entity", "mixed")),
            raw_hierarchy,
            cities_only=cities_only,
            graph=graph,
        )
        for _ in range(n_props)
    ]
    property_ids = [f"prop{i}" for i in range(n_props)]
    row_ids = [f"row{i:04d}" for i in range(n_rows)]

    rows: dict[str, dict[str, list]] = {cid: {} for cid in row_ids}
    coverage = [rng.uniform(0.4, 0.95) for _ in range(n_props)]
    for cid in row_ids:
        for pid, pool, cov in zip(property_ids, pools, coverage):
            if rng.random() > cov:
                continue
            count = 1 if rng.random() < 0.8 else rng.randint(2, 3)
            rows[cid][pid] = [pool.value(rng, raw_hierarchy) for _ in range(count)]

    present = sorted(
        {pid for values in rows.values() for pid in values},
        key=lambda pid: property_ids.index(pid),
    )
    cells: dict[str, dict[str, tuple]] = {pid: {} for pid in present}
    for cid in row_ids:
        for pid, values in rows[cid].items():
            cells[pid][cid] = tuple(values)
    comparison = Comparison(
        id="random",
        label="randomized comparison",
        columns=tuple(PropertyColumn(pid, pid) for pid in present),
        contribution_ids=tuple(row_ids),
        cells=cells,
    )
    return comparison, rows


def _sample_displays(rng: random.Random, rows: dict[str, dict[str, list]], pid: str, k: int) -> list[str]:
    from .oracle import naive_display

    pool = sorted({naive_display(v) for values in rows.values() for v in (values.get(pid) or [])})
    if not pool:
        return ["missing-" + "".join(rng.choices(string.ascii_lowercase, k=4))]
    picked = rng.sample(pool, min(k, len(pool)))
    if rng.random() < 0.2:
        picked.append("unseen-" + "".join(rng.choices(string.ascii_lowercase, k=4)))
    return picked


def _numeric_expr(rng: random.Random, magnitudes: list[Decimal]) -> dict:
    anchor = rng.choice(magnitudes) if magnitudes else Decimal("1")
    if rng.random() < 0.5:
        anchor += Decimal(str(round(rng.uniform(-5, 5), 2)))
    choice = rng.random()
    if choice < 0.5:
        op = rng.choice(("<", "<=", ">", ">=", ">", "<", "=", "!="))
        return {"type": "numeric_cmp", "op": op, "bound": str(anchor)}
    if choice < 0.8:
        spread = Decimal(str(round(rng.uniform(1, 25), 2)))
        return {
            "type": "numeric_range",
            "low": str(anchor - spread),
            "high": str(anchor + spread),
            "low_inclusive": rng.random() < 0.7,
            "high_inclusive": rng.random() < 0.7,
        }
    excluded = rng.sample(magnitudes, min(len(magnitudes), rng.randint(1, 3))) if magnitudes else []
    return {"type": "numeric_exclude", "values": [str(v) for v in excluded] or ["0"]}


def _temporal_expr(rng: random.Random, dates: list[date]) -> dict:
    anchor = rng.choice(dates) if dates else date(2020, 1, 1)
    shifted = anchor + timedelta(days=rng.randint(-90, 90))
    choice = rng.random()
    if choice < 0.25:
        return {"type": "temporal_on", "date": shifted.isoformat()}
    if choice < 0.5:
        return {"type": "temporal_before", "date": shifted.isoformat()}
    if choice < 0.75:
        return {"type": "temporal_after", "date": shifted.isoformat()}
    other = anchor + timedelta(days=rng.randint(-90, 90))
    start, end = sorted((shifted, other))
    return {"type": "temporal_interval", "start": start.isoformat(), "end": end.isoformat()}


def _taxonomic_expr(rng: random.Random, raw: dict[str, dict], present_ids: list[str]) -> dict:
    # Mostly select ancestors of entities the column actually holds, the way
    # a level dialog would; sometimes anywhere in the hierarchy.
    pool: list[str] = []
    if present_ids and rng.random() < 0.7:
        for _ in range(4):
            current = rng.choice(present_ids)
            while current is not None:
                pool.append(current)
                current = raw.get(current, {}).get("parent_id")
        pool = [i for i in pool if i != "x-earth"]
    if not pool:
        pool = [i for i in raw if i != "x-earth"]
    chosen = rng.sample(pool, min(len(pool), rng.randint(1, 2)))
    expr: dict = {
        "type": "taxonomic_under",
        "ancestors": [
            {"external_id": ext, "label": raw[ext]["label"], "graph": "geonames"}
            for ext in chosen
        ],
    }
    if rng.random() < 0.3:
        expr["level"] = rng.choice(("continent", "country", "region", "city", "leaf"))
    return expr


def random_filters_json(
    rng: random.Random,
    comparison: Comparison,
    rows: dict[str, dict[str, list]],
    raw_hierarchy: dict[str, dict],
    facets: list[FacetSpec] | None = None,
) -> dict[str, list[dict]]:
    """A kind-valid filter set in wire form for the given comparison."""
    if facets is None:
        facets = infer_facets(comparison)
    if not facets:
        return {}
    chosen = rng.sample(facets, min(len(facets), rng.randint(1, 4)))
    filters: dict[str, list[dict]] = {}
    for facet in chosen:
        pid = facet.property_id
        exprs: list[dict] = []
        for _ in range(1 if rng.random() < 0.75 else 2):
            if facet.kind == FacetKind.CATEGORICAL:
                exprs.append(
                    {"type": "categorical_in", "values": _sample_displays(rng, rows, pid, rng.randint(1, 4))}
                )
            elif facet.kind == FacetKind.NUMERIC:
                magnitudes = [
                    v.magnitude
                    for values in rows.values()
                    for v in (values.get(pid) or [])
                    if isinstance(v, QuantityValue)
                ]
                exprs.append(_numeric_expr(rng, magnitudes))
            elif facet.kind == FacetKind.TEMPORAL:
                dates = [
                    v.start
                    for values in rows.values()
                    for v in (values.get(pid) or [])
                    if isinstance(v, DateValue)
                ]
                exprs.append(_temporal_expr(rng, dates))
            else:
                present = [
                    v.link.external_id
                    for values in rows.values()
                    for v in (values.get(pid) or [])
                    if isinstance(v, EntityValue) and v.link
                ]
                exprs.append(_taxonomic_expr(rng, raw_hierarchy, present))
        filters[pid] = exprs
    return filters
