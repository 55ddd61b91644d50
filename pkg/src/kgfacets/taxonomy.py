"""Federated resolution of entity ancestor chains.

An entity linked to an external knowledge graph is resolved to its chain of
parents (leaf first, root last) by walking the graph's parent relation. Two
providers speak the same node schema: :class:`FixtureProvider` reads a
line-delimited file shipped in-repo, :class:`RemoteProvider` queries a live
HTTP service. Resolution is live per call; there is no cross-request cache
unless :class:`CachingProvider` is explicitly layered on, because stale
hierarchy data is worse than the extra latency and the fragility that live
queries bring.
"""

from __future__ import annotations

import json
import threading
import time
from abc import ABC, abstractmethod
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import requests

from .errors import (
    CycleDetected,
    DepthExceeded,
    InvalidValue,
    KgFacetsError,
    MalformedDocument,
    ProviderUnavailable,
    UnknownEntity,
)
from .values import EntityValue

MAX_CHAIN_DEPTH = 16
DEFAULT_TIMEOUT = 3.0
DEFAULT_RETRIES = 1
DEFAULT_MAX_INFLIGHT = 8


@dataclass(frozen=True)
class TaxonomyNode:
    external_id: str
    label: str
    feature_code: str
    parent_id: str | None = None

    def __post_init__(self) -> None:
        if not self.external_id:
            raise InvalidValue("taxonomy node needs a non-empty id")
        if self.parent_id == self.external_id:
            raise InvalidValue(f"taxonomy node {self.external_id!r} is its own parent")


@dataclass(frozen=True)
class AncestorChain:
    """Parent chain from the queried entity up to the root, leaf first."""

    nodes: tuple[TaxonomyNode, ...]

    def __post_init__(self) -> None:
        if not self.nodes:
            raise InvalidValue("ancestor chain cannot be empty")

    def __iter__(self):
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def leaf(self) -> TaxonomyNode:
        return self.nodes[0]

    @property
    def root(self) -> TaxonomyNode:
        return self.nodes[-1]

    def contains(self, external_id: str) -> bool:
        return any(node.external_id == external_id for node in self.nodes)


class HierarchyProvider(ABC):
    """Read-only, idempotent lookup of single taxonomy nodes for one graph."""

    graph: str = "geonames"

    @abstractmethod
    def resolve(self, external_id: str) -> TaxonomyNode:
        """Return the node for ``external_id`` or raise ``UnknownEntity``."""


def parse_node(obj: Any) -> TaxonomyNode:
    if not isinstance(obj, dict):
        raise MalformedDocument(f"hierarchy node must be an object, got {type(obj).__name__}")
    for key in ("id", "label", "feature_code"):
        if not isinstance(obj.get(key), str) or not obj[key]:
            raise MalformedDocument(f"hierarchy node needs a non-empty {key!r}")
    parent_id = obj.get("parent_id")
    if parent_id is not None and not isinstance(parent_id, str):
        raise MalformedDocument("hierarchy node 'parent_id' must be a string")
    return TaxonomyNode(
        external_id=obj["id"],
        label=obj["label"],
        feature_code=obj["feature_code"],
        parent_id=parent_id,
    )


class FixtureProvider(HierarchyProvider):
    """File- or mapping-backed hierarchy used in tests and offline runs.

    Keeps a call counter so per-call memoization is observable from tests.
    """

    def __init__(self, nodes: Iterable[TaxonomyNode] | Mapping[str, TaxonomyNode], graph: str = "geonames"):
        if isinstance(nodes, Mapping):
            self._nodes = dict(nodes)
        else:
            self._nodes = {node.external_id: node for node in nodes}
        self.graph = graph
        self.resolve_calls = 0
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path: str | Path, graph: str = "geonames") -> "FixtureProvider":
        nodes = []
        with open(path, "r", encoding="utf-8") as handle:
            for line_no, raw in enumerate(handle, start=1):
                stripped = raw.strip()
                if not stripped:
                    continue
                try:
                    obj = json.loads(stripped)
                except json.JSONDecodeError as exc:
                    raise MalformedDocument(f"invalid JSON: {exc.msg}", line=line_no) from None
                nodes.append(parse_node(obj))
        return cls(nodes, graph=graph)

    def resolve(self, external_id: str) -> TaxonomyNode:
        with self._lock:
            self.resolve_calls += 1
        try:
            return self._nodes[external_id]
        except KeyError:
            raise UnknownEntity(external_id) from None


class RemoteProvider(HierarchyProvider):
    """HTTP client for a hierarchy service.

    Wire contract: ``GET {base}/hierarchy/{external_id}`` returns a JSON
    array of nodes ordered leaf first, root last, using the same node schema
    as the fixture file. Transient failures are retried once; in-flight
    requests are bounded.
    """

    def __init__(
        self,
        base_url: str,
        graph: str = "geonames",
        timeout: float = DEFAULT_TIMEOUT,
        retries: int = DEFAULT_RETRIES,
        max_inflight: int = DEFAULT_MAX_INFLIGHT,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.graph = graph
        self.timeout = timeout
        self.retries = retries
        self._inflight = threading.Semaphore(max_inflight)
        self._session = session or requests.Session()

    def fetch_chain(self, external_id: str) -> tuple[TaxonomyNode, ...]:
        """One round trip for the whole chain; used as the walker's fast path."""
        url = f"{self.base_url}/hierarchy/{external_id}"
        last_cause = "unknown"
        for _ in range(self.retries + 1):
            try:
                with self._inflight:
                    response = self._session.get(url, timeout=self.timeout)
            except requests.Timeout:
                last_cause = "timeout"
                continue
            except requests.RequestException:
                last_cause = "network"
                continue
            if response.status_code == 404:
                raise UnknownEntity(external_id)
            if response.status_code >= 500:
                last_cause = f"http {response.status_code}"
                continue
            if response.status_code != 200:
                raise ProviderUnavailable(f"http {response.status_code}")
            try:
                payload = response.json()
                if not isinstance(payload, list) or not payload:
                    raise MalformedDocument("hierarchy response must be a non-empty array")
                return tuple(parse_node(entry) for entry in payload)
            except (ValueError, MalformedDocument, InvalidValue):
                raise ProviderUnavailable("protocol: malformed hierarchy response") from None
        raise ProviderUnavailable(last_cause)

    def resolve(self, external_id: str) -> TaxonomyNode:
        chain = self.fetch_chain(external_id)
        for node in chain:
            if node.external_id == external_id:
                return node
        raise ProviderUnavailable("protocol: queried entity missing from its own chain")


class CachingProvider(HierarchyProvider):
    """Optional bounded TTL cache layered over another provider.

    Off by default at the service level; errors are never cached. Safe for
    concurrent readers and writers.
    """

    def __init__(self, inner: HierarchyProvider, ttl_seconds: float = 300.0, max_entries: int = 1024):
        self.inner = inner
        self.graph = inner.graph
        self.ttl_seconds = ttl_seconds
        self.max_entries = max_entries
        self._entries: OrderedDict[tuple[str, str], tuple[float, Any]] = OrderedDict()
        self._lock = threading.Lock()
        # The bulk fast path exists only when the wrapped provider has one.
        if hasattr(inner, "fetch_chain"):
            self.fetch_chain = self._fetch_chain_cached

    def _get(self, key: tuple[str, str]) -> Any | None:
        now = time.monotonic()
        with self._lock:
            hit = self._entries.get(key)
            if hit is None:
                return None
            expires, payload = hit
            if expires < now:
                del self._entries[key]
                return None
            self._entries.move_to_end(key)
            return payload

    def _put(self, key: tuple[str, str], payload: Any) -> None:
        with self._lock:
            self._entries[key] = (time.monotonic() + self.ttl_seconds, payload)
            self._entries.move_to_end(key)
            while len(self._entries) > self.max_entries:
                self._entries.popitem(last=False)

    def resolve(self, external_id: str) -> TaxonomyNode:
        cached = self._get(("node", external_id))
        if cached is not None:
            return cached
        node = self.inner.resolve(external_id)
        self._put(("node", external_id), node)
        return node

    def _fetch_chain_cached(self, external_id: str) -> tuple[TaxonomyNode, ...]:
        cached = self._get(("chain", external_id))
        if cached is not None:
            return cached
        chain = self.inner.fetch_chain(external_id)
        self._put(("chain", external_id), chain)
        return chain


def _chain_from_nodes(nodes: Sequence[TaxonomyNode], max_depth: int) -> AncestorChain:
    seen: set[str] = set()
    for index, node in enumerate(nodes):
        if node.external_id in seen:
            raise CycleDetected(node.external_id)
        seen.add(node.external_id)
        if index + 1 < len(nodes) and node.parent_id != nodes[index + 1].external_id:
            raise ProviderUnavailable("protocol: hierarchy nodes are not parent-linked")
    if len(nodes) > max_depth:
        raise DepthExceeded(max_depth)
    return AncestorChain(tuple(nodes))


def _external_id_of(ref: EntityValue | str, graph: str) -> str:
    if isinstance(ref, str):
        return ref
    if ref.link is None:
        raise UnknownEntity(ref.entity_id)
    if ref.link.graph != graph:
        raise ValueError(
            f"entity {ref.entity_id!r} links to graph {ref.link.graph!r}, provider serves {graph!r}"
        )
    return ref.link.external_id


def resolve_chain(
    provider: HierarchyProvider,
    ref: EntityValue | str,
    *,
    max_depth: int = MAX_CHAIN_DEPTH,
    _node_memo: dict[str, TaxonomyNode] | None = None,
) -> AncestorChain:
    """Walk the parent relation from ``ref`` to the root.

    Stops at a node without a parent; a repeated id raises ``CycleDetected``
    and chains longer than ``max_depth`` raise ``DepthExceeded``.
    """
    external_id = _external_id_of(ref, provider.graph)

    fetch_chain = getattr(provider, "fetch_chain", None)
    if fetch_chain is not None and _node_memo is None:
        nodes = fetch_chain(external_id)
        if nodes[0].external_id != external_id:
            raise ProviderUnavailable("protocol: chain does not start at the queried entity")
        if nodes[-1].parent_id is not None:
            raise ProviderUnavailable("protocol: chain does not end at a root")
        return _chain_from_nodes(nodes, max_depth)

    memo = _node_memo if _node_memo is not None else {}
    nodes: list[TaxonomyNode] = []
    seen: set[str] = set()
    current = external_id
    while True:
        if current in seen:
            raise CycleDetected(current)
        seen.add(current)
        node = memo.get(current)
        if node is None:
            node = provider.resolve(current)
            memo[current] = node
        nodes.append(node)
        if node.parent_id is None:
            return AncestorChain(tuple(nodes))
        if len(nodes) >= max_depth:
            raise DepthExceeded(max_depth)
        current = node.parent_id


def is_under(
    provider: HierarchyProvider,
    ref: EntityValue | str,
    ancestor_external_id: str,
    *,
    max_depth: int = MAX_CHAIN_DEPTH,
) -> bool:
    """Descendant-or-self test: is ``ancestor_external_id`` in the ref's chain?"""
    external_id = _external_id_of(ref, provider.graph)
    if external_id == ancestor_external_id:
        return True
    return resolve_chain(provider, external_id, max_depth=max_depth).contains(ancestor_external_id)


def resolve_many(
    provider: HierarchyProvider,
    refs: Iterable[EntityValue | str],
    *,
    max_depth: int = MAX_CHAIN_DEPTH,
) -> dict[str, AncestorChain | KgFacetsError]:
    """Resolve several refs, deduplicated, with per-entry failures.

    Keys are external ids. Failures are returned in place, never raised, so
    one unknown entity cannot poison a batch. Memoization is per call only.
    """
    memo: dict[str, TaxonomyNode] = {}
    chain_memo: dict[str, AncestorChain | KgFacetsError] = {}
    results: dict[str, AncestorChain | KgFacetsError] = {}
    for ref in refs:
        try:
            external_id = _external_id_of(ref, provider.graph)
        except UnknownEntity as exc:
            results[exc.external_id] = exc
            continue
        if external_id in chain_memo:
            results[external_id] = chain_memo[external_id]
            continue
        try:
            use_memo = None if hasattr(provider, "fetch_chain") else memo
            chain: AncestorChain | KgFacetsError = resolve_chain(
                provider, external_id, max_depth=max_depth, _node_memo=use_memo
            )
        except (UnknownEntity, CycleDetected, DepthExceeded, ProviderUnavailable) as exc:
            chain = exc
        chain_memo[external_id] = chain
        results[external_id] = chain
    return results
