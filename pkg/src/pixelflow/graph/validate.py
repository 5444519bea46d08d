"""Graph validation: every invariant becomes a diagnostic, never an exception.

Rule ids are a stable contract shared with the CLI, the HTTP API, and the
node editor's client-side checks:

  duplicate_node_id, unknown_module, unknown_node, unknown_port,
  type_mismatch, input_occupied, cycle, missing_required_input,
  bad_param, bad_external_input
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .registry import ModuleRegistry
from .types import Edge, PipelineGraph


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str
    nodes: tuple[str, ...] = ()
    edges: tuple[tuple[str, str, str, str], ...] = ()

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "message": self.message,
            "nodes": list(self.nodes),
            "edges": [
                {"from": {"node": e[0], "port": e[1]}, "to": {"node": e[2], "port": e[3]}}
                for e in self.edges
            ],
        }


@dataclass
class ValidationReport:
    ok: bool
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def rules(self) -> set[str]:
        return {d.rule for d in self.diagnostics}

    def to_json(self) -> dict:
        return {"ok": self.ok, "diagnostics": [d.to_json() for d in self.diagnostics]}


def _edge_key(e: Edge) -> tuple[str, str, str, str]:
    return e.sort_key()


def _cycles(graph: PipelineGraph) -> list[list[str]]:
    """Strongly connected components with more than one node, plus
    self-loops, via Tarjan's algorithm (iterative)."""
    succs = graph.successors()
    self_loops = {e.src.node for e in graph.edges if e.src.node == e.dst.node}
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    out: list[list[str]] = []

    for root in graph.node_ids():
        if root in index:
            continue
        work = [(root, iter(sorted(succs.get(root, ()))))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(succs.get(nxt, ())))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    top = stack.pop()
                    on_stack.discard(top)
                    comp.append(top)
                    if top == node:
                        break
                if len(comp) > 1 or comp[0] in self_loops:
                    out.append(sorted(comp))
    return out


def validate_graph(graph: PipelineGraph, registry: ModuleRegistry) -> ValidationReport:
    """Check all graph invariants against ``registry``; total on any
    structurally well-formed graph. ``ok`` is true iff no diagnostics."""
    diags: list[Diagnostic] = []

    seen: set[str] = set()
    for n in graph.nodes:
        if n.node_id in seen:
            diags.append(Diagnostic("duplicate_node_id", f"node id {n.node_id!r} appears more than once", (n.node_id,)))
        seen.add(n.node_id)
    known_nodes = seen

    # Module resolution and hyperparameter checks.
    specs = {}
    for n in graph.nodes:
        entry = registry.resolve(n.module_id, n.module_version)
        if entry is None:
            diags.append(Diagnostic(
                "unknown_module",
                f"node {n.node_id!r} references unregistered module {n.module_id!r} v{n.module_version}",
                (n.node_id,),
            ))
            continue
        specs[n.node_id] = entry.spec
        for name, value in n.params.items():
            hp = entry.spec.hyperparam(name)
            if hp is None:
                diags.append(Diagnostic(
                    "bad_param",
                    f"node {n.node_id!r}: module {n.module_id!r} has no hyperparam {name!r}",
                    (n.node_id,),
                ))
                continue
            problem = hp.check_value(value)
            if problem:
                diags.append(Diagnostic(
                    "bad_param", f"node {n.node_id!r}: hyperparam {name!r} {problem}", (n.node_id,),
                ))

    # Edge endpoint resolution, typing, and single-writer inputs.
    fed_inputs: dict[tuple[str, str], int] = {}
    for e in graph.edges:
        key = _edge_key(e)
        endpoint_ok = True
        for end, side in ((e.src, "source"), (e.dst, "sink")):
            if end.node not in known_nodes:
                diags.append(Diagnostic(
                    "unknown_node", f"edge {side} references unknown node {end.node!r}", (), (key,),
                ))
                endpoint_ok = False
        if not endpoint_ok:
            continue
        src_spec = specs.get(e.src.node)
        dst_spec = specs.get(e.dst.node)
        src_port = src_spec.output(e.src.port) if src_spec else None
        dst_port = dst_spec.input(e.dst.port) if dst_spec else None
        if src_spec is not None and src_port is None:
            diags.append(Diagnostic(
                "unknown_port",
                f"node {e.src.node!r} has no output port {e.src.port!r}",
                (e.src.node,), (key,),
            ))
        if dst_spec is not None and dst_port is None:
            diags.append(Diagnostic(
                "unknown_port",
                f"node {e.dst.node!r} has no input port {e.dst.port!r}",
                (e.dst.node,), (key,),
            ))
        if src_port is not None and dst_port is not None and src_port.dtype != dst_port.dtype:
            diags.append(Diagnostic(
                "type_mismatch",
                f"edge carries {src_port.dtype} into {dst_port.dtype} "
                f"({e.src.node}.{e.src.port} -> {e.dst.node}.{e.dst.port})",
                (e.src.node, e.dst.node), (key,),
            ))
        if dst_spec is not None and dst_port is not None:
            fed_inputs[(e.dst.node, e.dst.port)] = fed_inputs.get((e.dst.node, e.dst.port), 0) + 1

    for (node_id, port), count in fed_inputs.items():
        if count > 1:
            diags.append(Diagnostic(
                "input_occupied",
                f"input {node_id}.{port} is fed by {count} edges; at most one edge may terminate at an input",
                (node_id,),
            ))

    # External input declarations.
    declared_external: set[tuple[str, str]] = set()
    for node_id, port in graph.external_inputs():
        locus = (node_id,) if node_id in known_nodes else ()
        if node_id not in known_nodes:
            diags.append(Diagnostic(
                "bad_external_input", f"external input references unknown node {node_id!r}", locus,
            ))
            continue
        spec = specs.get(node_id)
        if spec is not None and spec.input(port) is None:
            diags.append(Diagnostic(
                "bad_external_input",
                f"external input references missing input port {node_id}.{port}", locus,
            ))
            continue
        if (node_id, port) in fed_inputs:
            diags.append(Diagnostic(
                "bad_external_input",
                f"external input {node_id}.{port} is already fed by an edge", locus,
            ))
            continue
        declared_external.add((node_id, port))

    # Required inputs must be edge-fed or declared external.
    for n in graph.nodes:
        spec = specs.get(n.node_id)
        if spec is None:
            continue
        for port in spec.inputs:
            if not port.required:
                continue
            if (n.node_id, port.name) in fed_inputs or (n.node_id, port.name) in declared_external:
                continue
            diags.append(Diagnostic(
                "missing_required_input",
                f"required input {n.node_id}.{port.name} is neither edge-fed nor declared external",
                (n.node_id,),
            ))

    for comp in _cycles(graph):
        diags.append(Diagnostic(
            "cycle", "nodes form a dependency cycle: " + ", ".join(comp), tuple(comp),
        ))

    return ValidationReport(ok=not diags, diagnostics=diags)
