"""HTTP API behavior, CLI parity, degradation and permalink flows."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from kgfacets.cli import main as cli_main
from kgfacets.config import load_config
from kgfacets.service import SearchApp, create_app

from .conftest import COVID_DATASET, GEO_HIERARCHY
from .test_filters import EUROPEAN_ROWS

EUROPE_FILTERS = {
    "study_location": [
        {
            "type": "taxonomic_under",
            "ancestors": [{"external_id": "geo-europe", "label": "Europe", "graph": "geonames"}],
            "level": "continent",
        }
    ]
}


def write_config(
    tmp_path: Path,
    *,
    dataset: Path = COVID_DATASET,
    fixture: Path | None = GEO_HIERARCHY,
    remote: str | None = None,
    degradation: bool = True,
    cache: bool = False,
) -> Path:
    hierarchy = {"remote": remote} if remote else {"fixture": str(fixture)}
    config = {
        "dataset": str(dataset),
        "permalink_journal": str(tmp_path / "permalinks.jsonl"),
        "hierarchy": hierarchy,
        "degradation_enabled": degradation,
        "cache": {"enabled": cache, "ttl_seconds": 60},
        "listen": "127.0.0.1:8123",
        "candidate_cap": 50,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


@pytest.fixture()
def client(tmp_path):
    config = load_config(write_config(tmp_path))
    return TestClient(create_app(SearchApp(config)))


class TestComparisonEndpoints:
    def test_listing_contains_covid_comparison(self, client):
        body = client.get("/comparisons").json()
        entry = next(e for e in body["comparisons"] if e["kind"] == "comparison")
        assert entry["id"] == "covid-19-reproductive-number"
        assert entry["row_count"] == 31

    def test_listing_grows_after_save(self, client):
        before = len(client.get("/comparisons").json()["comparisons"])
        response = client.post(
            "/comparisons/covid-19-reproductive-number/save",
            json={"filters": {}, "surviving_ids": ["c001"]},
        )
        assert response.status_code == 200
        after = client.get("/comparisons").json()["comparisons"]
        assert len(after) == before + 1
        assert any(e["kind"] == "saved" and e["row_count"] == 1 for e in after)

    def test_comparison_payload_shape(self, client):
        body = client.get("/comparisons/covid-19-reproductive-number").json()
        assert len(body["contribution_ids"]) == 31
        assert body["tombstoned"] == []
        column_ids = [c["property_id"] for c in body["columns"]]
        assert set(column_ids) == {
            "r0_estimate", "study_location", "study_date", "method",
            "confidence_interval_95", "serial_interval",
        }
        cell = body["cells"]["r0_estimate"]["c001"][0]
        assert cell["type"] == "quantity" and cell["display"] == "2.7"
        assert body["contributions"]["c001"]["paper_title"]

    def test_unknown_comparison_404(self, client):
        response = client.get("/comparisons/nope")
        assert response.status_code == 404
        assert response.json()["code"] == "not_found"


class TestFacetEndpoints:
    def test_facets_include_taxonomic_location_and_numeric_r0(self, client):
        body = client.get("/comparisons/covid-19-reproductive-number/facets").json()
        assert body["degraded"] is False
        kinds = {f["property_id"]: f["kind"] for f in body["facets"]}
        assert kinds["study_location"] == "taxonomic"
        assert kinds["r0_estimate"] == "numeric"
        assert kinds["study_date"] == "temporal"

    def test_facets_of_valueless_comparison_are_empty(self, tmp_path):
        dataset = tmp_path / "empty_values.jsonl"
        dataset.write_text(
            json.dumps({"kind": "paper", "id": "p1", "title": "T", "authors": [], "year": 2020})
            + "\n"
            + json.dumps(
                {
                    "kind": "contribution", "id": "c1", "paper_id": "p1",
                    "label": "c", "research_problem": "bare problem", "values": {},
                }
            )
            + "\n",
            encoding="utf-8",
        )
        config = load_config(write_config(tmp_path, dataset=dataset))
        local = TestClient(create_app(SearchApp(config)))
        body = local.get("/comparisons/bare-problem/facets").json()
        assert body["facets"] == []

    def test_candidates_endpoint(self, client):
        url = "/comparisons/covid-19-reproductive-number/facets/study_location/candidates"
        body = client.get(url, params={"prefix": "ge"}).json()
        assert body["values"] == [{"value": "Geneva", "count": 1}]
        capped = client.get(url, params={"limit": 3}).json()
        assert len(capped["values"]) == 3 and capped["truncated"] is True

    def test_levels_endpoint(self, client):
        url = "/comparisons/covid-19-reproductive-number/facets/study_location/levels/country"
        body = client.get(url).json()
        buckets = {b["label"]: b["count"] for b in body["buckets"]}
        assert buckets["Germany"] == 4
        assert buckets["China"] == 8
        assert sum(buckets.values()) == 30  # one value per (row, location value)

    def test_unknown_level_400(self, client):
        url = "/comparisons/covid-19-reproductive-number/facets/study_location/levels/galaxy"
        assert client.get(url).status_code == 400

    def test_hierarchy_endpoint_leaf_first(self, client):
        body = client.get("/hierarchy/geo-bonn").json()
        assert [n["label"] for n in body["chain"]][:2] == ["Bonn", "Cologne District"]
        assert body["chain"][-1]["label"] == "Earth"


class TestFilterEndpoint:
    def test_europe_filter_matches_oracle_rows(self, client):
        response = client.post(
            "/comparisons/covid-19-reproductive-number/filter",
            json={"filters": EUROPE_FILTERS},
        )
        body = response.json()
        assert body["surviving_ids"] == EUROPEAN_ROWS
        assert body["degraded"] is False
        assert body["applied"][0]["property_id"] == "study_location"
        assert "Europe" in body["applied"][0]["descriptions"][0]

    def test_empty_filters_keep_all_rows(self, client):
        body = client.post(
            "/comparisons/covid-19-reproductive-number/filter", json={"filters": {}}
        ).json()
        assert len(body["surviving_ids"]) == 31

    def test_malformed_json_reports_position(self, client):
        response = client.post(
            "/comparisons/covid-19-reproductive-number/filter",
            content=b'{"filters": {broken',
            headers={"Content-Type": "application/json"},
        )
        assert response.status_code == 400
        body = response.json()
        assert body["code"] == "malformed_filter"
        assert "line" in body["detail"]["path"]

    def test_kind_mismatch_is_400_with_details(self, client):
        response = client.post(
            "/comparisons/covid-19-reproductive-number/filter",
            json={"filters": {"r0_estimate": [{"type": "categorical_in", "values": ["x"]}]}},
        )
        assert response.status_code == 400
        assert response.json()["code"] == "filter_validation"

    def test_filtering_is_stateless(self, client, tmp_path):
        journal = tmp_path / "permalinks.jsonl"
        for _ in range(2):
            body = client.post(
                "/comparisons/covid-19-reproductive-number/filter",
                json={"filters": EUROPE_FILTERS},
            ).json()
            assert body["surviving_ids"] == EUROPEAN_ROWS
        assert not journal.exists() or journal.stat().st_size == 0

    def test_concurrent_identical_requests_agree(self, client):
        def run(_):
            return client.post(
                "/comparisons/covid-19-reproductive-number/filter",
                json={"filters": EUROPE_FILTERS},
            ).json()["surviving_ids"]

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(run, range(16)))
        assert all(result == EUROPEAN_ROWS for result in results)


class TestSaveAndLoad:
    def test_save_then_get_roundtrips_filters_byte_equal(self, client):
        survivors = client.post(
            "/comparisons/covid-19-reproductive-number/filter",
            json={"filters": EUROPE_FILTERS},
        ).json()["surviving_ids"]
        saved = client.post(
            "/comparisons/covid-19-reproductive-number/save",
            json={"filters": EUROPE_FILTERS, "surviving_ids": survivors},
        ).json()
        body = client.get(saved["url"]).json()
        assert body["comparison"]["contribution_ids"] == survivors
        sent = json.dumps(EUROPE_FILTERS, sort_keys=True, separators=(",", ":"))
        stored = json.dumps(body["filters"], sort_keys=True, separators=(",", ":"))
        assert stored == sent

    def test_saved_view_is_refilterable(self, client):
        saved = client.post(
            "/comparisons/covid-19-reproductive-number/save",
            json={"filters": {}, "surviving_ids": EUROPEAN_ROWS},
        ).json()
        body = client.post(
            f"/comparisons/{saved['permalink_id']}/filter",
            json={"filters": {"r0_estimate": [{"type": "numeric_cmp", "op": ">", "bound": "3"}]}},
        ).json()
        assert set(body["surviving_ids"]) <= set(EUROPEAN_ROWS)
        assert body["surviving_ids"] == ["c002", "c005", "c006", "c007", "c026"]

    def test_unknown_permalink_404(self, client):
        assert client.get("/saved/deadbeef").status_code == 404

    def test_foreign_id_rejected(self, client):
        response = client.post(
            "/comparisons/covid-19-reproductive-number/save",
            json={"filters": {}, "surviving_ids": ["c001", "ghost"]},
        )
        assert response.status_code == 400
        assert response.json()["code"] == "invalid_subset"

    def test_reingest_tombstones_missing_rows(self, tmp_path):
        # dataset v2 drops c031; the saved subset must keep the row, flagged
        config_path = write_config(tmp_path)
        client_v1 = TestClient(create_app(SearchApp(load_config(config_path))))
        saved = client_v1.post(
            "/comparisons/covid-19-reproductive-number/save",
            json={"filters": {}, "surviving_ids": ["c001", "c031"]},
        ).json()

        v2 = tmp_path / "covid_v2.jsonl"
        lines = [
            line
            for line in COVID_DATASET.read_text(encoding="utf-8").splitlines()
            if '"id": "c031"' not in line
        ]
        v2.write_text("\n".join(lines) + "\n", encoding="utf-8")
        config_v2 = write_config(tmp_path, dataset=v2)

        client_v2 = TestClient(create_app(SearchApp(load_config(config_v2))))
        body = client_v2.get(saved["url"]).json()
        assert body["comparison"]["contribution_ids"] == ["c001", "c031"]
        assert body["comparison"]["tombstoned"] == ["c031"]


class TestDegradationPaths:
    def test_provider_down_with_degradation_serves_categorical(self, tmp_path, mock_server):
        mock_server.behavior = "error"
        config = load_config(
            write_config(tmp_path, fixture=None, remote=mock_server.base_url, degradation=True)
        )
        config.remote_retries = 0
        local = TestClient(create_app(SearchApp(config)))

        facets = local.get("/comparisons/covid-19-reproductive-number/facets").json()
        assert facets["degraded"] is True
        kinds = {f["property_id"]: (f["kind"], f["degraded"]) for f in facets["facets"]}
        assert kinds["study_location"] == ("categorical", True)
        assert kinds["r0_estimate"] == ("numeric", False)

        # non-taxonomic filtering still works
        body = local.post(
            "/comparisons/covid-19-reproductive-number/filter",
            json={"filters": {"r0_estimate": [{"type": "numeric_cmp", "op": ">", "bound": "2.5"}]}},
        ).json()
        assert len(body["surviving_ids"]) == 19

        # label selection on the degraded facet works without the provider
        body = local.post(
            "/comparisons/covid-19-reproductive-number/filter",
            json={"filters": {"study_location": [{"type": "categorical_in", "values": ["Bonn"]}]}},
        ).json()
        assert body["surviving_ids"] == ["c001", "c002"]

    def test_provider_down_without_degradation_is_502(self, tmp_path, mock_server):
        mock_server.behavior = "error"
        config = load_config(
            write_config(tmp_path, fixture=None, remote=mock_server.base_url, degradation=False)
        )
        config.remote_retries = 0
        local = TestClient(create_app(SearchApp(config)))

        assert local.get("/comparisons/covid-19-reproductive-number/facets").status_code == 502
        response = local.post(
            "/comparisons/covid-19-reproductive-number/filter",
            json={"filters": EUROPE_FILTERS},
        )
        assert response.status_code == 502
        assert response.json()["code"] == "provider_unavailable"

    def test_healthy_remote_equals_fixture_results(self, tmp_path, mock_server):
        config = load_config(
            write_config(tmp_path, fixture=None, remote=mock_server.base_url, degradation=False)
        )
        local = TestClient(create_app(SearchApp(config)))
        body = local.post(
            "/comparisons/covid-19-reproductive-number/filter",
            json={"filters": EUROPE_FILTERS},
        ).json()
        assert body["surviving_ids"] == EUROPEAN_ROWS


class TestConfig:
    def test_env_override_forces_remote(self, tmp_path, mock_server):
        path = write_config(tmp_path)
        config = load_config(path, env={"KGFACETS_HIERARCHY_URL": mock_server.base_url})
        assert config.remote_base_url == mock_server.base_url
        assert config.fixture_path is None

    def test_env_override_listen(self, tmp_path):
        config = load_config(write_config(tmp_path), env={"KGFACETS_LISTEN": "0.0.0.0:9000"})
        assert (config.listen_host, config.listen_port) == ("0.0.0.0", 9000)

    def test_both_providers_rejected(self, tmp_path):
        from kgfacets.errors import ConfigError

        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps(
                {
                    "dataset": str(COVID_DATASET),
                    "permalink_journal": str(tmp_path / "j.jsonl"),
                    "hierarchy": {"fixture": str(GEO_HIERARCHY), "remote": "http://x"},
                }
            ),
            encoding="utf-8",
        )
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_dataset_rejected(self, tmp_path):
        from kgfacets.errors import ConfigError

        with pytest.raises(ConfigError):
            load_config(write_config(tmp_path, dataset=tmp_path / "ghost.jsonl"))


class TestCliParity:
    def run(self, *args):
        return CliRunner().invoke(cli_main, list(args))

    def test_ingest_summary(self, covid_dataset_path):
        result = self.run("ingest", str(covid_dataset_path))
        assert result.exit_code == 0
        summary = json.loads(result.output)
        assert summary["contributions"] == 31
        assert summary["research_problems"] == ["COVID-19 reproductive number"]

    def test_ingest_failure_is_machine_readable(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"kind": "mystery"}\n', encoding="utf-8")
        result = self.run("ingest", str(bad))
        assert result.exit_code == 1
        assert json.loads(result.stderr)["code"] == "malformed_document"

    def test_facets_parity_with_api(self, tmp_path, client):
        config = write_config(tmp_path)
        result = self.run("--config", str(config), "facets", "covid-19-reproductive-number")
        assert result.exit_code == 0
        api = client.get("/comparisons/covid-19-reproductive-number/facets").json()
        assert json.loads(result.output) == api

    def test_facets_unknown_id_exits_nonzero(self, tmp_path):
        config = write_config(tmp_path)
        result = self.run("--config", str(config), "facets", "unknown")
        assert result.exit_code == 1
        assert json.loads(result.stderr)["code"] == "not_found"

    def test_filter_parity_with_api(self, tmp_path, client):
        config = write_config(tmp_path)
        filters_file = tmp_path / "europe.json"
        filters_file.write_text(json.dumps(EUROPE_FILTERS), encoding="utf-8")
        result = self.run(
            "--config", str(config), "filter", "covid-19-reproductive-number",
            "--filters", str(filters_file),
        )
        assert result.exit_code == 0
        api = client.post(
            "/comparisons/covid-19-reproductive-number/filter", json={"filters": EUROPE_FILTERS}
        ).json()
        assert json.loads(result.output) == api

    def test_save_then_saved_roundtrip(self, tmp_path):
        config = write_config(tmp_path)
        filters_file = tmp_path / "europe.json"
        filters_file.write_text(json.dumps(EUROPE_FILTERS), encoding="utf-8")
        saved = self.run(
            "--config", str(config), "save", "covid-19-reproductive-number",
            "--filters", str(filters_file),
        )
        assert saved.exit_code == 0
        permalink_id = json.loads(saved.output)["permalink_id"]

        shown = self.run("--config", str(config), "saved", permalink_id)
        assert shown.exit_code == 0
        body = json.loads(shown.output)
        assert body["comparison"]["contribution_ids"] == EUROPEAN_ROWS

    def test_resolve_prints_chain_leaf_first(self, tmp_path):
        config = write_config(tmp_path)
        result = self.run("--config", str(config), "resolve", "geo-bonn")
        assert result.exit_code == 0
        chain = json.loads(result.output)["chain"]
        assert [n["label"] for n in chain] == [
            "Bonn", "Cologne District", "North Rhine-Westphalia", "Germany", "Europe", "Earth",
        ]

    def test_list_parity(self, tmp_path, client):
        config = write_config(tmp_path)
        result = self.run("--config", str(config), "list")
        assert result.exit_code == 0
        # same base entries as a fresh API instance (journals differ per tmp dir)
        api_entries = [
            e for e in client.get("/comparisons").json()["comparisons"] if e["kind"] == "comparison"
        ]
        cli_entries = [
            e for e in json.loads(result.output)["comparisons"] if e["kind"] == "comparison"
        ]
        assert cli_entries == api_entries
