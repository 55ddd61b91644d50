"""HTTP API tying the modules together.

The application core (:class:`SearchApp`) is plain Python so the CLI and the
FastAPI handlers share one implementation and return identical payloads.
Comparisons are defined at startup by grouping contributions per research
problem; saved permalinks appear alongside them and stay filterable.

Filter requests never mutate server state; only saving does. Errors use one
envelope: ``{"code": ..., "message": ..., "detail": ...}``.
"""

from __future__ import annotations

import json
import re
import threading
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .comparison import Comparison, build_comparison
from .config import ServiceConfig
from .errors import (
    KgFacetsError,
    MalformedFilter,
    NotFound,
    ProviderUnavailable,
)
from .facets import (
    FacetKind,
    FacetSpec,
    TaxonomicSummary,
    TaxonomyLevel,
    candidate_values,
    degrade_to_categorical,
    facet_payload,
    facet_values_at_level,
    infer_facets,
)
from .filters import (
    FilterSet,
    apply_filters_detailed,
    describe_expr,
    filter_set_from_json,
    filter_set_to_json,
    validate_filters,
)
from .permalinks import Permalink, PermalinkJournal
from .store import SnapshotHolder, ingest_dataset
from .taxonomy import resolve_chain, resolve_many
from .values import value_payload


def slugify(label: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")
    return slug or "comparison"


def error_envelope(exc: KgFacetsError) -> dict[str, Any]:
    return {"code": exc.code, "message": str(exc), "detail": exc.detail()}


class SearchApp:
    """Application core shared by the HTTP handlers and the CLI."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.holder = SnapshotHolder(ingest_dataset(config.dataset_path))
        self.journal = PermalinkJournal(config.journal_path)
        self.provider = config.build_provider()
        self._comparisons_lock = threading.Lock()
        self._comparisons_revision: int | None = None
        self._comparisons: dict[str, Comparison] = {}

    # -- comparisons -------------------------------------------------------

    def base_comparisons(self) -> dict[str, Comparison]:
        """One comparison per research problem, rebuilt after re-ingestion."""
        snapshot = self.holder.current
        with self._comparisons_lock:
            if self._comparisons_revision != snapshot.revision:
                comparisons: dict[str, Comparison] = {}
                for problem in snapshot.research_problems():
                    ids = snapshot.list_contributions(problem)
                    comparison = build_comparison(
                        snapshot, ids, comparison_id=slugify(problem), label=problem
                    )
                    comparisons[comparison.id] = comparison
                self._comparisons = comparisons
                self._comparisons_revision = snapshot.revision
            return self._comparisons

    def comparison(self, comparison_id: str) -> Comparison:
        """Resolve a base comparison or a saved permalink view."""
        base = self.base_comparisons()
        if comparison_id in base:
            return base[comparison_id]
        if comparison_id in self.journal:
            view, _ = self._load_saved(comparison_id)
            return view
        raise NotFound(comparison_id, kind="comparison")

    def _source_for(self, permalink: Permalink) -> Comparison:
        base = self.base_comparisons()
        source = base.get(permalink.comparison_id)
        if source is not None:
            return source
        # The grouping itself disappeared; every frozen row is stale.
        return Comparison(
            id=permalink.comparison_id,
            label=permalink.comparison_id,
            columns=(),
            contribution_ids=(),
            cells={},
        )

    def _load_saved(self, permalink_id: str) -> tuple[Comparison, FilterSet]:
        permalink = self.journal.get(permalink_id)
        source = self._source_for(permalink)
        comparison, filters = self.journal.load(permalink_id, source)
        comparison = Comparison(
            id=permalink_id,
            label=f"{source.label} (saved)",
            columns=comparison.columns,
            contribution_ids=comparison.contribution_ids,
            cells=comparison.cells,
            tombstoned=comparison.tombstoned,
        )
        return comparison, filters

    def list_comparisons(self) -> dict[str, Any]:
        entries = [
            {
                "id": comparison.id,
                "label": comparison.label,
                "kind": "comparison",
                "row_count": comparison.row_count,
            }
            for comparison in self.base_comparisons().values()
        ]
        for permalink in sorted(self.journal.entries(), key=lambda p: p.created_at):
            source = self._source_for(permalink)
            entries.append(
                {
                    "id": permalink.permalink_id,
                    "label": f"{source.label} (saved)",
                    "kind": "saved",
                    "row_count": len(permalink.surviving_ids),
                }
            )
        return {"comparisons": entries}

    def comparison_payload(self, comparison_id: str) -> dict[str, Any]:
        comparison = self.comparison(comparison_id)
        snapshot = self.holder.current
        contributions_meta = {}
        for cid in comparison.contribution_ids:
            contribution = snapshot.contributions.get(cid)
            if contribution is None:
                continue
            paper = snapshot.papers.get(contribution.paper_id)
            contributions_meta[cid] = {
                "label": contribution.label,
                "paper_id": contribution.paper_id,
                "paper_title": paper.title if paper else None,
                "year": paper.year if paper else None,
                "research_problem": contribution.research_problem,
            }
        return {
            "id": comparison.id,
            "label": comparison.label,
            "columns": [
                {"property_id": column.property_id, "label": column.label}
                for column in comparison.columns
            ],
            "contribution_ids": list(comparison.contribution_ids),
            "tombstoned": sorted(comparison.tombstoned),
            "cells": {
                property_id: {
                    cid: [value_payload(v) for v in values]
                    for cid, values in by_row.items()
                }
                for property_id, by_row in comparison.cells.items()
            },
            "contributions": contributions_meta,
        }

    # -- facets ------------------------------------------------------------

    def _facet_specs(self, comparison: Comparison) -> tuple[list[FacetSpec], bool]:
        """Facets for a comparison, degrading taxonomic ones when the
        hierarchy is unreachable and degradation is enabled."""
        specs = infer_facets(
            comparison, hierarchy_graphs=frozenset({self.config.hierarchy_graph})
        )
        taxonomic = [spec for spec in specs if spec.kind == FacetKind.TAXONOMIC]
        if not taxonomic:
            return specs, False
        # Live probe, one resolution per distinct leaf (the federation is
        # queried per user operation; nothing is cached across requests).
        refs: list[str] = []
        for spec in taxonomic:
            assert isinstance(spec.summary, TaxonomicSummary)
            refs.extend(
                leaf.external_id
                for leaf in spec.summary.leaves
                if leaf.external_id and leaf.graph == self.provider.graph
            )
        outcomes = resolve_many(self.provider, refs)
        unavailable = next(
            (o for o in outcomes.values() if isinstance(o, ProviderUnavailable)), None
        )
        if unavailable is None:
            return specs, False
        if not self.config.degradation_enabled:
            raise unavailable
        return [degrade_to_categorical(spec) for spec in specs], True

    def facets_payload(self, comparison_id: str) -> dict[str, Any]:
        comparison = self.comparison(comparison_id)
        specs, degraded = self._facet_specs(comparison)
        return {
            "comparison_id": comparison.id,
            "degraded": degraded,
            "facets": [facet_payload(spec) for spec in specs],
        }

    def _facet(self, comparison: Comparison, property_id: str) -> tuple[FacetSpec, bool]:
        specs, degraded = self._facet_specs(comparison)
        for spec in specs:
            if spec.property_id == property_id:
                return spec, degraded
        raise NotFound(property_id, kind="facet")

    def candidates_payload(
        self, comparison_id: str, property_id: str, prefix: str = "", limit: int | None = None
    ) -> dict[str, Any]:
        comparison = self.comparison(comparison_id)
        spec, degraded = self._facet(comparison, property_id)
        entries, truncated = candidate_values(
            spec, prefix=prefix, limit=limit or self.config.candidate_cap
        )
        return {
            "comparison_id": comparison.id,
            "property_id": property_id,
            "prefix": prefix,
            "degraded": degraded,
            "truncated": truncated,
            "values": [{"value": value, "count": count} for value, count in entries],
        }

    def levels_payload(self, comparison_id: str, property_id: str, level: str) -> dict[str, Any]:
        comparison = self.comparison(comparison_id)
        try:
            parsed_level = TaxonomyLevel(level)
        except ValueError:
            raise MalformedFilter(f"unknown level {level!r}", path="level") from None
        spec, degraded = self._facet(comparison, property_id)
        if degraded and spec.kind == FacetKind.CATEGORICAL:
            # Hierarchy unreachable: fall back to leaf labels, flagged, never
            # silently empty.
            entries, _ = candidate_values(spec, limit=self.config.candidate_cap)
            return {
                "comparison_id": comparison.id,
                "property_id": property_id,
                "level": TaxonomyLevel.LEAF.value,
                "degraded": True,
                "buckets": [
                    {"label": value, "external_id": None, "count": count}
                    for value, count in entries
                ],
            }
        buckets = facet_values_at_level(spec, parsed_level, self.provider)
        return {
            "comparison_id": comparison.id,
            "property_id": property_id,
            "level": parsed_level.value,
            "degraded": False,
            "buckets": [
                {"label": b.label, "external_id": b.external_id, "count": b.count}
                for b in buckets
            ],
        }

    # -- filtering ---------------------------------------------------------

    def _validated(self, comparison: Comparison, filters_obj: Any) -> tuple[FilterSet, list[FacetSpec]]:
        filter_set = (
            filters_obj
            if isinstance(filters_obj, FilterSet)
            else filter_set_from_json(filters_obj, path="$.filters")
        )
        specs = infer_facets(
            comparison, hierarchy_graphs=frozenset({self.config.hierarchy_graph})
        )
        validate_filters(
            filter_set,
            specs,
            allow_categorical_on_taxonomic=self.config.degradation_enabled,
        )
        return filter_set, specs

    def filter_payload(
        self,
        comparison_id: str,
        filters_obj: Any,
        levels: dict[str, str] | None = None,
    ) -> dict[str, Any]:
        comparison = self.comparison(comparison_id)
        filter_set, specs = self._validated(comparison, filters_obj)
        survivors, degraded = apply_filters_detailed(
            comparison,
            filter_set,
            self.provider,
            degradation_enabled=self.config.degradation_enabled,
        )
        labels = {spec.property_id: spec.label for spec in specs}
        kinds = {spec.property_id: spec.kind.value for spec in specs}
        applied = [
            {
                "property_id": property_id,
                "label": labels.get(property_id, property_id),
                "kind": kinds.get(property_id, "categorical"),
                "level": (levels or {}).get(property_id),
                "descriptions": [describe_expr(expr) for expr in exprs],
            }
            for property_id, exprs in sorted(filter_set.items())
            if exprs
        ]
        return {
            "comparison_id": comparison.id,
            "surviving_ids": survivors,
            "total": comparison.row_count,
            "surviving": len(survivors),
            "degraded": degraded,
            "applied": applied,
        }

    # -- permalinks ----------------------------------------------------------

    def save_payload(
        self, comparison_id: str, filters_obj: Any, surviving_ids: list[str]
    ) -> dict[str, Any]:
        comparison = self.comparison(comparison_id)
        filter_set, _ = self._validated(comparison, filters_obj)
        permalink = self.journal.save(
            comparison,
            filter_set,
            surviving_ids,
            snapshot_revision=self.holder.current.revision,
        )
        return {
            "permalink_id": permalink.permalink_id,
            "url": f"/saved/{permalink.permalink_id}",
            "comparison_id": comparison.id,
            "created_at": permalink.created_at,
        }

    def saved_payload(self, permalink_id: str) -> dict[str, Any]:
        permalink = self.journal.get(permalink_id)
        return {
            "permalink_id": permalink_id,
            "comparison_id": permalink.comparison_id,
            "snapshot_revision": permalink.snapshot_revision,
            "created_at": permalink.created_at,
            "filters": filter_set_to_json(permalink.filters),
            "comparison": self.comparison_payload(permalink_id),
        }

    # -- taxonomy ------------------------------------------------------------

    def resolve_payload(self, external_id: str) -> dict[str, Any]:
        chain = resolve_chain(self.provider, external_id)
        return {
            "external_id": external_id,
            "chain": [
                {
                    "id": node.external_id,
                    "label": node.label,
                    "feature_code": node.feature_code,
                    "parent_id": node.parent_id,
                }
                for node in chain
            ],
        }


async def _read_json(request: Request) -> Any:
    body = await request.body()
    try:
        return json.loads(body.decode("utf-8") if body else "null")
    except json.JSONDecodeError as exc:
        raise MalformedFilter(
            f"request body is not valid JSON: {exc.msg}",
            path=f"line {exc.lineno}, col {exc.colno}",
        ) from None


def create_app(core: SearchApp | ServiceConfig) -> FastAPI:
    if isinstance(core, ServiceConfig):
        core = SearchApp(core)
    app = FastAPI(title="kgfacets", version="0.1.0")
    app.state.core = core
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(KgFacetsError)
    async def _domain_error(_request: Request, exc: KgFacetsError) -> JSONResponse:
        return JSONResponse(status_code=exc.http_status, content=error_envelope(exc))

    @app.get("/comparisons")
    async def list_comparisons() -> Any:
        return core.list_comparisons()

    @app.get("/comparisons/{comparison_id}")
    async def get_comparison(comparison_id: str) -> Any:
        return core.comparison_payload(comparison_id)

    @app.get("/comparisons/{comparison_id}/facets")
    async def get_facets(comparison_id: str) -> Any:
        return core.facets_payload(comparison_id)

    @app.get("/comparisons/{comparison_id}/facets/{property_id}/candidates")
    async def get_candidates(
        comparison_id: str, property_id: str, prefix: str = "", limit: int | None = None
    ) -> Any:
        return core.candidates_payload(comparison_id, property_id, prefix=prefix, limit=limit)

    @app.get("/comparisons/{comparison_id}/facets/{property_id}/levels/{level}")
    async def get_level_values(comparison_id: str, property_id: str, level: str) -> Any:
        return core.levels_payload(comparison_id, property_id, level)

    @app.post("/comparisons/{comparison_id}/filter")
    async def post_filter(comparison_id: str, request: Request) -> Any:
        body = await _read_json(request)
        if not isinstance(body, dict) or "filters" not in body:
            raise MalformedFilter("body must be an object with 'filters'", path="$")
        levels = body.get("levels")
        if levels is not None and not isinstance(levels, dict):
            raise MalformedFilter("'levels' must map property ids to level names", path="$.levels")
        return core.filter_payload(comparison_id, body["filters"], levels)

    @app.post("/comparisons/{comparison_id}/save")
    async def post_save(comparison_id: str, request: Request) -> Any:
        body = await _read_json(request)
        if not isinstance(body, dict) or "filters" not in body or "surviving_ids" not in body:
            raise MalformedFilter(
                "body must be an object with 'filters' and 'surviving_ids'", path="$"
            )
        surviving = body["surviving_ids"]
        if not isinstance(surviving, list) or any(not isinstance(x, str) for x in surviving):
            raise MalformedFilter("'surviving_ids' must be a list of strings", path="$.surviving_ids")
        return core.save_payload(comparison_id, body["filters"], surviving)

    @app.get("/saved/{permalink_id}")
    async def get_saved(permalink_id: str) -> Any:
        return core.saved_payload(permalink_id)

    @app.get("/hierarchy/{external_id}")
    async def get_hierarchy(external_id: str) -> Any:
        return core.resolve_payload(external_id)

    if core.config.static_dir and core.config.static_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=core.config.static_dir, html=True), name="ui")

    return app
