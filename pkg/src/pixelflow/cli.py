"""Command-line entry point: validate pipelines, run them locally on
private data and seeds, list the module catalog, and launch the server.

Exit codes: 0 success, 1 domain failure (validation, execution, port in
use), 2 usage or parse failure.
"""

from __future__ import annotations

import errno
import os
import sys
from pathlib import Path

import click

from .batch import run_batch
from .canonical import canonical_dumps
from .errors import ParseError, PixelflowError, RetryBudgetExhausted, SchemaError
from .graph.serialize import deserialize_pipeline
from .graph.validate import validate_graph
from .modules.library import default_registry
from .values import ImageValue, TextValue, value_from_literal

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _env_default(name: str, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    return type(fallback)(raw)


@click.group()
def main():
    """Typed dataflow pipelines for synthetic segmentation datasets."""


def _load_graph(path: str):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    return deserialize_pipeline(raw)


@main.command()
@click.argument("path", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["human", "structured"]), default="human")
def validate(path: str, fmt: str):
    """Validate a pipeline file; exit 0 iff it is valid."""
    try:
        graph = _load_graph(path)
    except ParseError as exc:
        loc = f" (line {exc.line}, column {exc.column})" if exc.line else ""
        click.echo(f"parse error: {exc.message}{loc}", err=True)
        sys.exit(EXIT_USAGE)
    except PixelflowError as exc:
        click.echo(f"{exc.code}: {exc.message}", err=True)
        sys.exit(EXIT_USAGE)
    report = validate_graph(graph, default_registry())
    if fmt == "structured":
        click.echo(canonical_dumps(report.to_json()), nl=False)
    else:
        for diag in report.diagnostics:
            locus = ",".join(diag.nodes) or ",".join("->".join(e) for e in diag.edges)
            click.echo(f"{diag.rule} [{locus}] {diag.message}")
        click.echo("ok" if report.ok else f"{len(report.diagnostics)} problem(s) found")
    sys.exit(EXIT_OK if report.ok else EXIT_FAILURE)


def _parse_binding(raw: str) -> tuple[str, str, str]:
    target, sep, value = raw.partition("=")
    node, dot, port = target.partition(".")
    if not sep or not dot or not node or not port:
        raise click.UsageError(f"--bind expects node.port=value, got {raw!r}")
    return node, port, value


def _decode_binding(dtype, raw: str):
    import json as _json

    if raw.startswith("@"):
        path = Path(raw[1:])
        data = path.read_bytes()
        if path.suffix.lower() == ".png":
            return ImageValue.from_png(data)
        return TextValue(data.decode("utf-8"))
    try:
        literal = _json.loads(raw)
    except _json.JSONDecodeError:
        literal = raw
    try:
        return value_from_literal(dtype, literal)
    except SchemaError:
        # unquoted text values arrive as bare words
        return value_from_literal(dtype, str(raw))


@main.command()
@click.argument("path", type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--count", "-k", default=1, show_default=True, type=int, help="Accepted samples to generate.")
@click.option("--parallelism", default=1, show_default=True, type=int)
@click.option("--bind", "bindings", multiple=True, help="External input: node.port=value or node.port=@file")
@click.option("--overwrite", is_flag=True, default=False)
@click.option("--retry-factor", default=5, show_default=True, type=int,
              help="Attempt budget as a multiple of --count.")
@click.option("--format", "fmt", type=click.Choice(["human", "structured"]), default="human")
def run(path, out_dir, seed, count, parallelism, bindings, overwrite, retry_factor, fmt):
    """Execute a pipeline COUNT times and write the accepted samples as a
    dataset (images/, masks/, manifest.json, summary.json)."""
    registry = default_registry()
    try:
        graph = _load_graph(path)
    except ParseError as exc:
        click.echo(f"parse error: {exc.message}", err=True)
        sys.exit(EXIT_USAGE)
    report = validate_graph(graph, registry)
    if not report.ok:
        for diag in report.diagnostics:
            click.echo(f"{diag.rule}: {diag.message}", err=True)
        sys.exit(EXIT_FAILURE)

    specs = {n.node_id: registry.get(n.module_id, n.module_version).spec for n in graph.nodes}
    external = {}
    try:
        for raw in bindings:
            node, port, value = _parse_binding(raw)
            declared = dict.fromkeys(graph.external_inputs())
            if (node, port) not in declared:
                raise click.UsageError(f"{node}.{port} is not a declared external input")
            dtype = specs[node].input(port).dtype
            external[(node, port)] = _decode_binding(dtype, value)
    except OSError as exc:
        click.echo(f"cannot read binding file: {exc}", err=True)
        sys.exit(EXIT_USAGE)

    try:
        summary, manifest = run_batch(
            graph, registry, out_dir,
            seed=seed, count=count, parallelism=parallelism,
            external_inputs=external, overwrite=overwrite, retry_factor=retry_factor,
        )
    except RetryBudgetExhausted as exc:
        click.echo(f"{exc.code}: {exc.message}", err=True)
        sys.exit(EXIT_FAILURE)
    except PixelflowError as exc:
        click.echo(f"{exc.code}: {exc.message}", err=True)
        sys.exit(EXIT_FAILURE)

    if fmt == "structured":
        click.echo(canonical_dumps(summary.to_json()), nl=False)
    else:
        click.echo(f"wrote {summary.accepted} samples to {out_dir} "
                   f"({summary.attempts} attempts, acceptance rate {summary.acceptance_rate:.3f})")
        if summary.mean_miou is not None:
            click.echo(f"mean mIoU over accepted samples: {summary.mean_miou:.4f}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--label", default=None, help="Keep only modules carrying this label.")
@click.option("--format", "fmt", type=click.Choice(["human", "structured"]), default="human")
def modules(label, fmt):
    """List the module catalog, sorted by id."""
    specs = default_registry().list_specs()
    if label is not None:
        specs = [s for s in specs if label in s.labels]
    if fmt == "structured":
        click.echo(canonical_dumps({"modules": [s.to_json() for s in specs]}), nl=False)
    else:
        for spec in specs:
            labels = ",".join(sorted(spec.labels))
            click.echo(f"{spec.id}@{spec.version}  {spec.display_name}  [{labels}]")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=None, type=int, help="Default 8645 or PIXELFLOW_PORT.")
@click.option("--workers", default=None, type=int, help="Concurrent jobs; default 2 or PIXELFLOW_WORKERS.")
@click.option("--data-dir", default=None, type=click.Path(), help="Default ./pixelflow-data or PIXELFLOW_DATA_DIR.")
@click.option("--cache-mib", default=None, type=int, help="Result cache size; default 512 or PIXELFLOW_CACHE_MIB.")
@click.option("--queue-cap", default=None, type=int, help="Default 1000 or PIXELFLOW_QUEUE_CAP.")
def serve(host, port, workers, data_dir, cache_mib, queue_cap):
    """Run the HTTP server until interrupted."""
    import uvicorn

    from .server.app import create_app
    from .server.service import JobService

    port = port if port is not None else _env_default("PIXELFLOW_PORT", 8645)
    workers = workers if workers is not None else _env_default("PIXELFLOW_WORKERS", 2)
    data_dir = data_dir if data_dir is not None else _env_default("PIXELFLOW_DATA_DIR", "pixelflow-data")
    cache_mib = cache_mib if cache_mib is not None else _env_default("PIXELFLOW_CACHE_MIB", 512)
    queue_cap = queue_cap if queue_cap is not None else _env_default("PIXELFLOW_QUEUE_CAP", 1000)

    import socket

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        click.echo(f"cannot bind {host}:{port}: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    finally:
        probe.close()

    service = JobService(
        data_dir,
        workers=workers,
        queue_cap=queue_cap,
        cache_bytes=cache_mib * 1024 * 1024,
    )
    try:
        uvicorn.run(create_app(service), host=host, port=port, log_level="warning")
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_FAILURE
        sys.exit(EXIT_FAILURE if code else EXIT_OK)
    except OSError as exc:
        if exc.errno in (errno.EADDRINUSE, errno.EACCES):
            click.echo(f"cannot bind {host}:{port}: {exc}", err=True)
            sys.exit(EXIT_FAILURE)
        raise
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
