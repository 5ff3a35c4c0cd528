"""Batch CLI: a thin client of the verification service.

``run`` posts the scenario document to the service and writes the returned
report artifacts to disk; by default the service runs in-process (no server
needed), ``--server`` points the same client at a remote instance.  Exit
status: 0 when every check passes, 1 when any check fails, 2 on configuration
errors (unparseable file, bad references, class mismatches).
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import httpx

from . import __version__

OUTPUT_DIR_ENV = "TRUNCPICARD_OUTPUT_DIR"


def _make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # starlette's sync ASGI client warns about its httpx backend; the
        # in-process default is exactly that client
        warnings.simplefilter("ignore", UserWarning)
        from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


@click.group()
@click.version_option(version=__version__, prog_name="truncpicard")
def main() -> None:
    """Truncated Picard iteration checks on Schauder-basis sequence spaces."""


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--output-dir", default=None, help="directory for report files "
              f"(overrides ${OUTPUT_DIR_ENV} and the scenario's own output.dir)")
@click.option("--server", default=None, help="base URL of a running service; "
              "default executes in-process")
def run(scenario_file: str, output_dir: str | None, server: str | None) -> None:
    """Execute one scenario file and write its reports."""
    path = Path(scenario_file)
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        click.echo(f"config error: {path}:{exc.lineno}:{exc.colno}: {exc.msg}", err=True)
        sys.exit(2)
    with _make_client(server) as client:
        response = client.post("/run", json={"scenario": document})
        if response.status_code in (400, 422):
            detail = response.json().get("detail")
            click.echo(f"config error: {detail}", err=True)
            sys.exit(2)
        response.raise_for_status()
        payload = response.json()

    target = output_dir or os.environ.get(OUTPUT_DIR_ENV) or payload.get("output_dir") \
        or f"truncpicard-out/{payload['name']}"
    base = Path(target)
    for artifact in payload["artifacts"]:
        destination = base / artifact["path"]
        destination.parent.mkdir(parents=True, exist_ok=True)
        destination.write_text(artifact["content"])
    for check in payload["checks"]:
        status = "SKIP" if not check["hypothesis_met"] else \
            ("PASS" if check["pass"] else "FAIL")
        click.echo(f"{status} {check['name']}: lhs={check['lhs']} rhs={check['rhs']}")
    click.echo(f"reports written to {base}")
    sys.exit(0 if payload["all_passed"] else 1)


@main.command()
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@click.option("--server", default=None, help="base URL of a running service")
def presets(as_json: bool, server: str | None) -> None:
    """List the named operator, basis and delay presets."""
    with _make_client(server) as client:
        response = client.get("/presets")
        response.raise_for_status()
        entries = response.json()
    if as_json:
        click.echo(json.dumps(entries, indent=2))
        return
    width = max(len(e["name"]) for e in entries)
    for entry in entries:
        click.echo(f"{entry['name']:<{width}}  {entry['kind']:<8}  {entry['description']}")


@main.command()
def version() -> None:
    """Print the package version."""
    click.echo(__version__)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the verification service with uvicorn."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
