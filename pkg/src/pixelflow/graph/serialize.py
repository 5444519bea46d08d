"""Canonical pipeline file format.

One valid graph has exactly one byte representation: keys sorted at every
level, nodes sorted by node_id, edges sorted by their endpoint 4-tuple,
2-space indent, LF endings. Hyperparameter defaults are materialized so an
exported file is self-contained and immune to later default changes. The
content digest of those bytes is the pipeline id.
"""

from __future__ import annotations

import json
from typing import Any

from ..canonical import canonical_bytes, sha256_hex
from ..errors import InvalidGraph, ParseError, SchemaError, UnsupportedVersion
from .registry import ModuleRegistry
from .types import FORMAT_VERSION, Edge, Endpoint, NodeInstance, PipelineGraph
from .validate import validate_graph


def graph_to_json(graph: PipelineGraph, registry: ModuleRegistry) -> dict:
    """Canonical JSON object for a graph (defaults materialized, lists sorted)."""
    nodes = []
    for n in sorted(graph.nodes, key=lambda n: n.node_id):
        spec = registry.get(n.module_id, n.module_version).spec
        params = spec.default_params()
        for name, value in n.params.items():
            hp = spec.hyperparam(name)
            params[name] = hp.normalize(value) if hp else value
        nodes.append({
            "node_id": n.node_id,
            "module_id": n.module_id,
            "module_version": n.module_version,
            "params": params,
        })
    edges = [
        {"from": e.src.to_json(), "to": e.dst.to_json()}
        for e in sorted(graph.edges, key=Edge.sort_key)
    ]
    return {
        "format_version": graph.format_version,
        "name": graph.name,
        "metadata": dict(graph.metadata),
        "nodes": nodes,
        "edges": edges,
    }


def serialize_pipeline(graph: PipelineGraph, registry: ModuleRegistry) -> bytes:
    """Canonical bytes of a valid graph; raises InvalidGraph otherwise."""
    report = validate_graph(graph, registry)
    if not report.ok:
        rules = ", ".join(sorted(report.rules()))
        exc = InvalidGraph(f"graph fails validation ({rules})")
        exc.report = report
        raise exc
    return canonical_bytes(graph_to_json(graph, registry))


def pipeline_digest(data: bytes) -> str:
    return sha256_hex(data)


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{where}: missing required field {key!r}")
    return obj[key]


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"{where}: unknown field {sorted(unknown)[0]!r}")


def _parse_endpoint(obj: Any, where: str) -> Endpoint:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: endpoint must be an object")
    _check_keys(obj, {"node", "port"}, where)
    node = _require(obj, "node", where)
    port = _require(obj, "port", where)
    if not isinstance(node, str) or not isinstance(port, str):
        raise SchemaError(f"{where}: endpoint node and port must be strings")
    return Endpoint(node, port)


def deserialize_pipeline(data: bytes | str) -> PipelineGraph:
    """Parse pipeline bytes; key and element order need not be canonical."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed pipeline text: {exc.msg} at line {exc.lineno} column {exc.colno}",
                         line=exc.lineno, column=exc.colno) from exc
    if not isinstance(obj, dict):
        raise SchemaError("pipeline document must be an object")
    _check_keys(obj, {"format_version", "name", "metadata", "nodes", "edges"}, "pipeline")
    version = _require(obj, "format_version", "pipeline")
    if not isinstance(version, int) or isinstance(version, bool):
        raise SchemaError("pipeline: format_version must be an integer")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"unsupported format_version {version} (supported: {FORMAT_VERSION})")
    name = _require(obj, "name", "pipeline")
    if not isinstance(name, str):
        raise SchemaError("pipeline: name must be a string")

    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
    ):
        raise SchemaError("pipeline: metadata must map strings to strings")

    raw_nodes = _require(obj, "nodes", "pipeline")
    if not isinstance(raw_nodes, list):
        raise SchemaError("pipeline: nodes must be a list")
    nodes = []
    for i, rn in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(rn, dict):
            raise SchemaError(f"{where}: node must be an object")
        _check_keys(rn, {"node_id", "module_id", "module_version", "params"}, where)
        node_id = _require(rn, "node_id", where)
        module_id = _require(rn, "module_id", where)
        module_version = _require(rn, "module_version", where)
        if not isinstance(node_id, str) or not isinstance(module_id, str):
            raise SchemaError(f"{where}: node_id and module_id must be strings")
        if not isinstance(module_version, int) or isinstance(module_version, bool):
            raise SchemaError(f"{where}: module_version must be an integer")
        params = rn.get("params", {})
        if not isinstance(params, dict):
            raise SchemaError(f"{where}: params must be an object")
        nodes.append(NodeInstance(node_id=node_id, module_id=module_id,
                                  module_version=module_version, params=params))

    raw_edges = _require(obj, "edges", "pipeline")
    if not isinstance(raw_edges, list):
        raise SchemaError("pipeline: edges must be a list")
    edges = []
    for i, re_ in enumerate(raw_edges):
        where = f"edges[{i}]"
        if not isinstance(re_, dict):
            raise SchemaError(f"{where}: edge must be an object")
        _check_keys(re_, {"from", "to"}, where)
        edges.append(Edge(
            src=_parse_endpoint(_require(re_, "from", where), f"{where}.from"),
            dst=_parse_endpoint(_require(re_, "to", where), f"{where}.to"),
        ))

    return PipelineGraph(name=name, nodes=tuple(nodes), edges=tuple(edges),
                         metadata=metadata, format_version=version)
