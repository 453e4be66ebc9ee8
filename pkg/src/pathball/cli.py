"""Thin command-line client for the experiment service.

Each subcommand reads a flat key-value config file, posts it to the HTTP
service (a remote one via --server, otherwise an in-process instance) and
renders the response as CSV or JSON lines.
"""

from __future__ import annotations

import csv
import io
import json
import sys

import click

from .config import ConfigError, ExperimentConfig, config_dict, load_config


def _client(server: str | None):
    import httpx
    if server:
        return httpx.Client(base_url=server, timeout=3600.0)
    from fastapi.testclient import TestClient
    from .service.app import app
    return TestClient(app)


def _request_body(config: ExperimentConfig) -> dict:
    body = config_dict(config)
    body.pop("experiment")
    return body


def _post(server, experiment, config) -> dict:
    with _client(server) as client:
        resp = client.post(f"/experiments/{experiment}", json=_request_body(config))
        if resp.status_code != 200:
            raise click.ClickException(f"service error {resp.status_code}: {resp.text}")
        return resp.json()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _render_rows(report: dict, fmt: str) -> str:
    rows = report["rows"]
    if fmt == "json":
        lines = [json.dumps(r) for r in rows]
        if report.get("summary"):
            lines.append(json.dumps({"summary": report["summary"]}))
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _render_verify(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    lines = []
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        lines.append(f"{status}  {c['name']:32s} max_dev={c['max_deviation']:.3e} "
                     f"tol={c['threshold']:.1e}")
    lines.append(f"overall: {'PASS' if report['passed'] else 'FAIL'} "
                 f"(config {report['provenance']['config_hash']}, "
                 f"{report['provenance']['version']})")
    return "\n".join(lines) + "\n"


_shared = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="flat key-value config file"),
    click.option("--seed", type=int, default=None, help="override the master seed"),
    click.option("--out", type=click.Path(), default=None, help="output path"),
    click.option("--threads", type=int, default=None,
                 help="worker threads (speed only, never results)"),
    click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                 default="csv"),
    click.option("--server", default=None,
                 help="base URL of a running service; default runs in-process"),
]


def shared_options(fn):
    for opt in reversed(_shared):
        fn = opt(fn)
    return fn


def _build_config(experiment, config_path, seed, threads) -> ExperimentConfig:
    overrides = {"experiment": experiment, "seed": seed, "threads": threads}
    try:
        if config_path:
            return load_config(config_path, **overrides)
        return ExperimentConfig(**{k: v for k, v in overrides.items()
                                   if v is not None})
    except ConfigError as exc:
        raise click.ClickException(f"config error: {exc}")


@click.group()
def main():
    """Experiments on the twisted group of algebra-valued step paths."""


@main.command()
@shared_options
def verify(config_path, seed, out, threads, fmt, server):
    """Run the identity verification suite; nonzero exit on any failure."""
    config = _build_config("verify", config_path, seed, threads)
    report = _post(server, "verify", config)
    _emit(_render_verify(report, fmt), out)
    if not report["passed"]:
        sys.exit(1)


def _table_command(name, help_text):
    @main.command(name=name, help=help_text)
    @shared_options
    def cmd(config_path, seed, out, threads, fmt, server):
        config = _build_config(name, config_path, seed, threads)
        report = _post(server, name, config)
        _emit(_render_rows(report, fmt), out)
    return cmd


invariance = _table_command(
    "invariance", "Transport distances between ball measures and their "
                  "right-translate pushforwards, one row per N.")
concentration = _table_command(
    "concentration", "Angle concentration statistics, one row per N.")
jacobian = _table_command(
    "jacobian", "Finite-difference Jacobian determinants of the measure-"
                "preserving maps.")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn
    uvicorn.run("pathball.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
