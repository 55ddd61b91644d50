"""Immutable in-memory store of typed scholarly statements.

Datasets are ingested from line-delimited JSON: one document per line, each
tagged with a ``kind`` of ``paper``, ``contribution`` or ``property`` (see
``docs/formats.md`` for the exact schema). Ingestion is strict and atomic:
the first malformed document, duplicate id, dangling paper reference or
invalid value aborts the whole ingest, so a returned snapshot always passes
the referential-integrity walk.

Snapshots are immutable after construction and safe to share across threads;
replacing one is an atomic swap done by :class:`SnapshotHolder`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from threading import Lock
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping

from .errors import (
    DanglingPaperRef,
    DuplicateId,
    InvalidValue,
    MalformedDocument,
    NotFound,
)
from .values import Value, parse_value

MIN_YEAR = 1500
MAX_YEAR = 2100


@dataclass(frozen=True)
class Paper:
    id: str
    title: str
    authors: tuple[str, ...]
    venue: str | None
    year: int
    doi: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise InvalidValue("paper id must be non-empty")
        if not self.title:
            raise InvalidValue(f"paper {self.id!r} needs a non-empty title")
        if not MIN_YEAR <= self.year <= MAX_YEAR:
            raise InvalidValue(
                f"paper {self.id!r} year {self.year} outside [{MIN_YEAR}, {MAX_YEAR}]"
            )


@dataclass(frozen=True)
class Contribution:
    """One research result of one paper: a property -> values map plus labels."""

    id: str
    paper_id: str
    label: str
    research_problem: str
    values: Mapping[str, tuple[Value, ...]]

    def __post_init__(self) -> None:
        if not self.id:
            raise InvalidValue("contribution id must be non-empty")
        for property_id, values in self.values.items():
            if not property_id:
                raise InvalidValue(f"contribution {self.id!r} has an empty property id")
            if not values:
                raise InvalidValue(
                    f"contribution {self.id!r} property {property_id!r} maps to no values; "
                    "omit the property instead"
                )


@dataclass(frozen=True)
class Statement:
    """Subject / property / value triple, the unit of the exhaustive walks."""

    subject_id: str
    property_id: str
    value: Value

    def __post_init__(self) -> None:
        if not self.subject_id or not self.property_id:
            raise InvalidValue("statement subject and property ids must be non-empty")


@dataclass(frozen=True)
class StoreSnapshot:
    papers: Mapping[str, Paper]
    contributions: Mapping[str, Contribution]
    property_labels: Mapping[str, str]
    revision: int = 1

    def contribution(self, contribution_id: str) -> Contribution:
        try:
            return self.contributions[contribution_id]
        except KeyError:
            raise NotFound(contribution_id, kind="contribution") from None

    def list_contributions(self, research_problem: str | None = None) -> list[str]:
        """Ids of all contributions, optionally narrowed to one research problem.

        Problem matching is exact but case-insensitive; order is lexicographic.
        """
        if research_problem is None:
            return sorted(self.contributions)
        wanted = research_problem.lower()
        return sorted(
            cid
            for cid, contribution in self.contributions.items()
            if contribution.research_problem.lower() == wanted
        )

    def research_problems(self) -> list[str]:
        """Distinct research-problem labels, lexicographic, first spelling wins."""
        seen: dict[str, str] = {}
        for contribution in self.contributions.values():
            seen.setdefault(contribution.research_problem.lower(), contribution.research_problem)
        return sorted(seen.values(), key=str.lower)

    def property_label(self, property_id: str) -> str:
        return self.property_labels.get(property_id, property_id)

    def statements(self) -> Iterator[Statement]:
        for contribution in self.contributions.values():
            for property_id, values in contribution.values.items():
                for value in values:
                    yield Statement(contribution.id, property_id, value)


def _require(obj: dict[str, Any], key: str, line: int) -> Any:
    if key not in obj or obj[key] is None:
        raise MalformedDocument(f"document is missing {key!r}", line=line)
    return obj[key]


def _require_str(obj: dict[str, Any], key: str, line: int) -> str:
    raw = _require(obj, key, line)
    if not isinstance(raw, str) or not raw:
        raise MalformedDocument(f"{key!r} must be a non-empty string", line=line)
    return raw


def _optional_str(obj: dict[str, Any], key: str, line: int) -> str | None:
    raw = obj.get(key)
    if raw is None:
        return None
    if not isinstance(raw, str):
        raise MalformedDocument(f"{key!r} must be a string", line=line)
    return raw


def _parse_paper(obj: dict[str, Any], line: int) -> Paper:
    authors_raw = obj.get("authors", [])
    if not isinstance(authors_raw, list) or any(not isinstance(a, str) for a in authors_raw):
        raise MalformedDocument("'authors' must be a list of strings", line=line)
    year = _require(obj, "year", line)
    if isinstance(year, bool) or not isinstance(year, int):
        raise MalformedDocument("'year' must be an integer", line=line)
    try:
        return Paper(
            id=_require_str(obj, "id", line),
            title=_require_str(obj, "title", line),
            authors=tuple(authors_raw),
            venue=_optional_str(obj, "venue", line),
            year=year,
            doi=_optional_str(obj, "doi", line),
        )
    except InvalidValue as exc:
        raise InvalidValue(exc.reason, line=line) from None


def _parse_contribution(obj: dict[str, Any], line: int) -> Contribution:
    values_raw = obj.get("values", {})
    if not isinstance(values_raw, dict):
        raise MalformedDocument("'values' must be an object", line=line)
    values: dict[str, tuple[Value, ...]] = {}
    for property_id, entries in values_raw.items():
        if not isinstance(entries, list):
            raise MalformedDocument(
                f"values for property {property_id!r} must be a list", line=line
            )
        try:
            values[property_id] = tuple(parse_value(entry) for entry in entries)
        except InvalidValue as exc:
            raise InvalidValue(f"property {property_id!r}: {exc.reason}", line=line) from None
    try:
        return Contribution(
            id=_require_str(obj, "id", line),
            paper_id=_require_str(obj, "paper_id", line),
            label=_require_str(obj, "label", line),
            research_problem=_require_str(obj, "research_problem", line),
            values=MappingProxyType(values),
        )
    except InvalidValue as exc:
        raise InvalidValue(exc.reason, line=line) from None


def ingest_dataset(source: Iterable[str] | str | Path, *, revision: int = 1) -> StoreSnapshot:
    """Parse a line-delimited document stream into a snapshot.

    ``source`` may be a path or any iterable of lines. Blank lines are
    ignored. Raises on the first malformed document, duplicate id within a
    namespace, dangling paper reference or invalid value; a snapshot is only
    returned when every document materialized.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return ingest_dataset(handle, revision=revision)

    papers: dict[str, Paper] = {}
    contributions: dict[str, Contribution] = {}
    labels: dict[str, str] = {}

    for line_no, raw in enumerate(source, start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped, parse_float=Decimal)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"invalid JSON: {exc.msg}", line=line_no, position=exc.colno) from None
        if not isinstance(obj, dict):
            raise MalformedDocument("document must be a JSON object", line=line_no)
        kind = obj.get("kind")
        if kind == "paper":
            paper = _parse_paper(obj, line_no)
            if paper.id in papers:
                raise DuplicateId(paper.id, line=line_no)
            papers[paper.id] = paper
        elif kind == "contribution":
            contribution = _parse_contribution(obj, line_no)
            if contribution.id in contributions:
                raise DuplicateId(contribution.id, line=line_no)
            contributions[contribution.id] = contribution
        elif kind == "property":
            property_id = _require_str(obj, "id", line_no)
            if property_id in labels:
                raise DuplicateId(property_id, line=line_no)
            labels[property_id] = _require_str(obj, "label", line_no)
        else:
            raise MalformedDocument(f"unknown document kind: {kind!r}", line=line_no)

    for contribution in contributions.values():
        if contribution.paper_id not in papers:
            raise DanglingPaperRef(contribution.id, contribution.paper_id)
        # Undeclared properties fall back to the id as their label.
        for property_id in contribution.values:
            labels.setdefault(property_id, property_id)

    return StoreSnapshot(
        papers=MappingProxyType(papers),
        contributions=MappingProxyType(contributions),
        property_labels=MappingProxyType(labels),
        revision=revision,
    )


class SnapshotHolder:
    """Single published snapshot; re-ingestion swaps in the successor atomically."""

    def __init__(self, snapshot: StoreSnapshot):
        self._snapshot = snapshot
        self._lock = Lock()

    @property
    def current(self) -> StoreSnapshot:
        return self._snapshot

    def reingest(self, source: Iterable[str] | str | Path) -> StoreSnapshot:
        with self._lock:
            snapshot = ingest_dataset(source, revision=self._snapshot.revision + 1)
            self._snapshot = snapshot
            return snapshot
