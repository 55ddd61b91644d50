from __future__ import annotations

import json
from pathlib import Path

import pytest

from kgfacets.comparison import build_comparison
from kgfacets.store import ingest_dataset
from kgfacets.taxonomy import FixtureProvider

from .mock_hierarchy import MockHierarchyServer

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"

COVID_DATASET = FIXTURES / "covid_r0.jsonl"
GEO_HIERARCHY = FIXTURES / "geo_hierarchy.jsonl"
RESEARCH_PROBLEM = "COVID-19 reproductive number"


@pytest.fixture(scope="session")
def covid_dataset_path() -> Path:
    return COVID_DATASET


@pytest.fixture(scope="session")
def geo_hierarchy_path() -> Path:
    return GEO_HIERARCHY


@pytest.fixture(scope="session")
def snapshot():
    return ingest_dataset(COVID_DATASET)


@pytest.fixture(scope="session")
def covid_comparison(snapshot):
    ids = snapshot.list_contributions(RESEARCH_PROBLEM)
    return build_comparison(snapshot, ids, comparison_id="covid", label=RESEARCH_PROBLEM)


@pytest.fixture(scope="session")
def geo_raw_nodes() -> dict[str, dict]:
    nodes = {}
    with open(GEO_HIERARCHY, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                obj = json.loads(line)
                nodes[obj["id"]] = obj
    return nodes


@pytest.fixture()
def geo_provider() -> FixtureProvider:
    # Function-scoped: the resolve-call counter must start at zero.
    return FixtureProvider.load(GEO_HIERARCHY)


@pytest.fixture()
def mock_server(geo_raw_nodes):
    server = MockHierarchyServer(geo_raw_nodes).start()
    yield server
    server.stop()
