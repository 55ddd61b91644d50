"""Command-line access to every API capability.

Each subcommand prints the same JSON payload the HTTP endpoint would return
(exit 0), or the error envelope on stderr (exit 1).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import load_config
from .errors import KgFacetsError
from .service import SearchApp, create_app, error_envelope
from .store import ingest_dataset


def _emit(payload: object) -> None:
    click.echo(json.dumps(payload, indent=2, ensure_ascii=False))


def _fail(exc: KgFacetsError) -> None:
    click.echo(json.dumps(error_envelope(exc)), err=True)
    sys.exit(1)


def _core(ctx: click.Context) -> SearchApp:
    config_path = ctx.obj.get("config")
    if not config_path:
        click.echo(json.dumps({"code": "config_error", "message": "--config is required"}), err=True)
        sys.exit(2)
    return SearchApp(load_config(config_path))


@click.group()
@click.option("--config", type=click.Path(path_type=Path), default=None, help="Service config file.")
@click.pass_context
def main(ctx: click.Context, config: Path | None) -> None:
    """Faceted search over structured scholarly contributions."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = config


@main.command()
@click.argument("dataset", type=click.Path(exists=True, path_type=Path))
def ingest(dataset: Path) -> None:
    """Parse and validate a dataset file, printing an ingest summary."""
    try:
        snapshot = ingest_dataset(dataset)
    except KgFacetsError as exc:
        _fail(exc)
        return
    _emit(
        {
            "papers": len(snapshot.papers),
            "contributions": len(snapshot.contributions),
            "properties": len(snapshot.property_labels),
            "research_problems": snapshot.research_problems(),
            "revision": snapshot.revision,
        }
    )


@main.command()
@click.pass_context
def serve(ctx: click.Context) -> None:
    """Run the HTTP API."""
    import uvicorn

    try:
        core = _core(ctx)
    except KgFacetsError as exc:
        _fail(exc)
        return
    app = create_app(core)
    uvicorn.run(app, host=core.config.listen_host, port=core.config.listen_port)


@main.command(name="list")
@click.pass_context
def list_cmd(ctx: click.Context) -> None:
    """List comparisons, including saved permalinks."""
    try:
        _emit(_core(ctx).list_comparisons())
    except KgFacetsError as exc:
        _fail(exc)


@main.command()
@click.argument("comparison_id")
@click.pass_context
def facets(ctx: click.Context, comparison_id: str) -> None:
    """Show the inferred facets of a comparison."""
    try:
        _emit(_core(ctx).facets_payload(comparison_id))
    except KgFacetsError as exc:
        _fail(exc)


@main.command(name="filter")
@click.argument("comparison_id")
@click.option("--filters", "filters_file", required=True, type=click.Path(exists=True, path_type=Path))
@click.pass_context
def filter_cmd(ctx: click.Context, comparison_id: str, filters_file: Path) -> None:
    """Apply a filter-set JSON file and print the surviving ids."""
    try:
        filters_obj = json.loads(filters_file.read_text(encoding="utf-8"))
        _emit(_core(ctx).filter_payload(comparison_id, filters_obj))
    except KgFacetsError as exc:
        _fail(exc)


@main.command()
@click.argument("comparison_id")
@click.option("--filters", "filters_file", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--ids", "ids_csv", default=None, help="Surviving ids; defaults to the filter result.")
@click.pass_context
def save(ctx: click.Context, comparison_id: str, filters_file: Path, ids_csv: str | None) -> None:
    """Persist a filtered subset as a shareable permalink."""
    try:
        core = _core(ctx)
        filters_obj = json.loads(filters_file.read_text(encoding="utf-8"))
        if ids_csv is None:
            surviving = core.filter_payload(comparison_id, filters_obj)["surviving_ids"]
        else:
            surviving = [part for part in ids_csv.split(",") if part]
        _emit(core.save_payload(comparison_id, filters_obj, surviving))
    except KgFacetsError as exc:
        _fail(exc)


@main.command()
@click.argument("permalink_id")
@click.pass_context
def saved(ctx: click.Context, permalink_id: str) -> None:
    """Show a saved permalink: frozen subset plus its filters."""
    try:
        _emit(_core(ctx).saved_payload(permalink_id))
    except KgFacetsError as exc:
        _fail(exc)


@main.command()
@click.argument("external_id")
@click.pass_context
def resolve(ctx: click.Context, external_id: str) -> None:
    """Resolve an external entity's ancestor chain, leaf first."""
    try:
        _emit(_core(ctx).resolve_payload(external_id))
    except KgFacetsError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
