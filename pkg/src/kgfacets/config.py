"""Service configuration: JSON file plus environment overrides.

Exactly one hierarchy provider must be configured, either a fixture file or
a remote base URL. ``KGFACETS_LISTEN`` overrides the listen address and
``KGFACETS_HIERARCHY_URL`` forces a remote provider, both without touching
the file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .taxonomy import (
    DEFAULT_MAX_INFLIGHT,
    DEFAULT_RETRIES,
    DEFAULT_TIMEOUT,
    CachingProvider,
    FixtureProvider,
    HierarchyProvider,
    RemoteProvider,
)

ENV_LISTEN = "KGFACETS_LISTEN"
ENV_HIERARCHY_URL = "KGFACETS_HIERARCHY_URL"


@dataclass
class ServiceConfig:
    dataset_path: Path
    journal_path: Path
    fixture_path: Path | None = None
    remote_base_url: str | None = None
    hierarchy_graph: str = "geonames"
    degradation_enabled: bool = True
    cache_enabled: bool = False
    cache_ttl_seconds: float = 300.0
    cache_max_entries: int = 1024
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    candidate_cap: int = 50
    remote_timeout: float = DEFAULT_TIMEOUT
    remote_retries: int = DEFAULT_RETRIES
    remote_max_inflight: int = DEFAULT_MAX_INFLIGHT
    static_dir: Path | None = None

    def __post_init__(self) -> None:
        if (self.fixture_path is None) == (self.remote_base_url is None):
            raise ConfigError("configure exactly one hierarchy provider (fixture or remote)")
        if not self.dataset_path.is_file():
            raise ConfigError(f"dataset not readable: {self.dataset_path}")
        if self.fixture_path is not None and not self.fixture_path.is_file():
            raise ConfigError(f"hierarchy fixture not readable: {self.fixture_path}")

    def build_provider(self) -> HierarchyProvider:
        provider: HierarchyProvider
        if self.remote_base_url is not None:
            provider = RemoteProvider(
                self.remote_base_url,
                graph=self.hierarchy_graph,
                timeout=self.remote_timeout,
                retries=self.remote_retries,
                max_inflight=self.remote_max_inflight,
            )
        else:
            provider = FixtureProvider.load(self.fixture_path, graph=self.hierarchy_graph)
        if self.cache_enabled:
            provider = CachingProvider(
                provider,
                ttl_seconds=self.cache_ttl_seconds,
                max_entries=self.cache_max_entries,
            )
        return provider


def _parse_listen(raw: str) -> tuple[str, int]:
    host, _, port = raw.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"listen address must be host:port, got {raw!r}")
    return host, int(port)


def load_config(path: str | Path, env: dict[str, str] | None = None) -> ServiceConfig:
    environ = os.environ if env is None else env
    base = Path(path).parent
    try:
        with open(path, "r", encoding="utf-8") as handle:
            obj = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")

    def resolve(raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else base / p

    for key in ("dataset", "permalink_journal"):
        if not isinstance(obj.get(key), str):
            raise ConfigError(f"config needs a string {key!r}")

    hierarchy = obj.get("hierarchy")
    if not isinstance(hierarchy, dict):
        raise ConfigError("config needs a 'hierarchy' object with 'fixture' or 'remote'")
    fixture_raw = hierarchy.get("fixture")
    remote_raw = hierarchy.get("remote")

    remote_override = environ.get(ENV_HIERARCHY_URL)
    if remote_override:
        fixture_raw, remote_raw = None, remote_override

    cache = obj.get("cache", {})
    if not isinstance(cache, dict):
        raise ConfigError("'cache' must be an object")

    listen_raw = environ.get(ENV_LISTEN) or obj.get("listen", "127.0.0.1:8080")
    host, port = _parse_listen(str(listen_raw))

    static_raw = obj.get("static_dir")

    return ServiceConfig(
        dataset_path=resolve(obj["dataset"]),
        journal_path=resolve(obj["permalink_journal"]),
        fixture_path=resolve(fixture_raw) if fixture_raw else None,
        remote_base_url=str(remote_raw) if remote_raw else None,
        hierarchy_graph=str(obj.get("hierarchy_graph", "geonames")),
        degradation_enabled=bool(obj.get("degradation_enabled", True)),
        cache_enabled=bool(cache.get("enabled", False)),
        cache_ttl_seconds=float(cache.get("ttl_seconds", 300.0)),
        cache_max_entries=int(cache.get("max_entries", 1024)),
        listen_host=host,
        listen_port=port,
        candidate_cap=int(obj.get("candidate_cap", 50)),
        remote_timeout=float(obj.get("remote_timeout", DEFAULT_TIMEOUT)),
        remote_retries=int(obj.get("remote_retries", DEFAULT_RETRIES)),
        remote_max_inflight=int(obj.get("remote_max_inflight", DEFAULT_MAX_INFLIGHT)),
        static_dir=resolve(static_raw) if isinstance(static_raw, str) else None,
    )
