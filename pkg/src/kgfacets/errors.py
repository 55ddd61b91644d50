"""Exception hierarchy for the package.

Every error carries a stable ``code`` plus a ``detail()`` dict so the HTTP
layer and the CLI can render the same machine-readable envelope.
"""

from __future__ import annotations

from typing import Any


class KgFacetsError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"
    http_status = 500

    def detail(self) -> dict[str, Any]:
        return {}


# ---------------------------------------------------------------------------
# Store / ingestion


class MalformedDocument(KgFacetsError):
    """A dataset line is not a well-formed document."""

    code = "malformed_document"
    http_status = 400

    def __init__(self, reason: str, line: int | None = None, position: int | None = None):
        where = f" (line {line}{f', col {position}' if position is not None else ''})" if line else ""
        super().__init__(f"{reason}{where}")
        self.reason = reason
        self.line = line
        self.position = position

    def detail(self) -> dict[str, Any]:
        return {"line": self.line, "position": self.position}


class DuplicateId(KgFacetsError):
    code = "duplicate_id"
    http_status = 400

    def __init__(self, entity_id: str, line: int | None = None):
        super().__init__(f"duplicate id {entity_id!r}" + (f" (line {line})" if line else ""))
        self.entity_id = entity_id
        self.line = line

    def detail(self) -> dict[str, Any]:
        return {"id": self.entity_id, "line": self.line}


class DanglingPaperRef(KgFacetsError):
    code = "dangling_paper_ref"
    http_status = 400

    def __init__(self, contribution_id: str, paper_id: str):
        super().__init__(
            f"contribution {contribution_id!r} references unknown paper {paper_id!r}"
        )
        self.contribution_id = contribution_id
        self.paper_id = paper_id

    def detail(self) -> dict[str, Any]:
        return {"contribution_id": self.contribution_id, "paper_id": self.paper_id}


class InvalidValue(KgFacetsError):
    code = "invalid_value"
    http_status = 400

    def __init__(self, reason: str, line: int | None = None):
        super().__init__(f"{reason}" + (f" (line {line})" if line else ""))
        self.reason = reason
        self.line = line

    def detail(self) -> dict[str, Any]:
        return {"line": self.line}


class NotFound(KgFacetsError):
    code = "not_found"
    http_status = 404

    def __init__(self, entity_id: str, kind: str = "entity"):
        super().__init__(f"{kind} {entity_id!r} not found")
        self.entity_id = entity_id
        self.kind = kind

    def detail(self) -> dict[str, Any]:
        return {"id": self.entity_id, "kind": self.kind}


# ---------------------------------------------------------------------------
# Comparisons / permalinks


class UnknownContribution(KgFacetsError):
    code = "unknown_contribution"
    http_status = 400

    def __init__(self, contribution_id: str):
        super().__init__(f"unknown contribution {contribution_id!r}")
        self.contribution_id = contribution_id

    def detail(self) -> dict[str, Any]:
        return {"contribution_id": self.contribution_id}


class EmptySelection(KgFacetsError):
    code = "empty_selection"
    http_status = 400

    def __init__(self) -> None:
        super().__init__("a comparison needs at least one contribution")


class InvalidSubset(KgFacetsError):
    code = "invalid_subset"
    http_status = 400

    def __init__(self, foreign_ids: list[str]):
        super().__init__(f"ids not part of the comparison: {', '.join(foreign_ids)}")
        self.foreign_ids = list(foreign_ids)

    def detail(self) -> dict[str, Any]:
        return {"foreign_ids": self.foreign_ids}


class PersistenceFailure(KgFacetsError):
    code = "persistence_failure"
    http_status = 500

    def __init__(self, cause: str):
        super().__init__(f"could not persist permalink: {cause}")
        self.cause = cause

    def detail(self) -> dict[str, Any]:
        return {"cause": self.cause}


# ---------------------------------------------------------------------------
# Facets / filters


class WrongFacetKind(KgFacetsError):
    code = "wrong_facet_kind"
    http_status = 400

    def __init__(self, expected: str, got: str):
        super().__init__(f"operation expects a {expected} facet, got {got}")
        self.expected = expected
        self.got = got

    def detail(self) -> dict[str, Any]:
        return {"expected": self.expected, "got": self.got}


class KindMismatch(KgFacetsError):
    code = "kind_mismatch"
    http_status = 400

    def __init__(self, property_id: str, expected: str, got: str):
        super().__init__(
            f"property {property_id!r}: filter kind {got} does not match facet kind {expected}"
        )
        self.property_id = property_id
        self.expected = expected
        self.got = got

    def detail(self) -> dict[str, Any]:
        return {"property_id": self.property_id, "expected": self.expected, "got": self.got}


class UnknownProperty(KgFacetsError):
    code = "unknown_property"
    http_status = 400

    def __init__(self, property_id: str):
        super().__init__(f"no facet for property {property_id!r}")
        self.property_id = property_id

    def detail(self) -> dict[str, Any]:
        return {"property_id": self.property_id}


class FilterValidationError(KgFacetsError):
    """Aggregate of every mismatch found while validating a filter set."""

    code = "filter_validation"
    http_status = 400

    def __init__(self, problems: list[KindMismatch | UnknownProperty]):
        super().__init__("; ".join(str(p) for p in problems))
        self.problems = list(problems)

    def detail(self) -> dict[str, Any]:
        return {
            "problems": [
                {"code": p.code, "message": str(p), **p.detail()} for p in self.problems
            ]
        }


class MalformedFilter(KgFacetsError):
    """A filter payload does not follow the documented JSON schema."""

    code = "malformed_filter"
    http_status = 400

    def __init__(self, reason: str, path: str = "$"):
        super().__init__(f"{reason} (at {path})")
        self.reason = reason
        self.path = path

    def detail(self) -> dict[str, Any]:
        return {"path": self.path}


class ConfigError(KgFacetsError):
    code = "config_error"
    http_status = 500

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


# ---------------------------------------------------------------------------
# Taxonomy federation


class ProviderUnavailable(KgFacetsError):
    code = "provider_unavailable"
    http_status = 502

    def __init__(self, cause: str, property_id: str | None = None):
        suffix = f" (while filtering {property_id!r})" if property_id else ""
        super().__init__(f"hierarchy provider unavailable: {cause}{suffix}")
        self.cause = cause
        self.property_id = property_id

    def detail(self) -> dict[str, Any]:
        return {"cause": self.cause, "property_id": self.property_id}


class UnknownEntity(KgFacetsError):
    code = "unknown_entity"
    http_status = 404

    def __init__(self, external_id: str):
        super().__init__(f"hierarchy has no entity {external_id!r}")
        self.external_id = external_id

    def detail(self) -> dict[str, Any]:
        return {"external_id": self.external_id}


class CycleDetected(KgFacetsError):
    code = "cycle_detected"
    http_status = 502

    def __init__(self, external_id: str):
        super().__init__(f"parent chain revisits {external_id!r}")
        self.external_id = external_id

    def detail(self) -> dict[str, Any]:
        return {"external_id": self.external_id}


class DepthExceeded(KgFacetsError):
    code = "depth_exceeded"
    http_status = 502

    def __init__(self, max_depth: int):
        super().__init__(f"parent chain longer than the configured maximum of {max_depth}")
        self.max_depth = max_depth

    def detail(self) -> dict[str, Any]:
        return {"max_depth": self.max_depth}
