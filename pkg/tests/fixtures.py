"""Validation fixture set and random graph generators.

Shared by the unit tests and the acceptance suite. Each validation entry is
(name, graph, expected_rules) where expected_rules is the exact set of rule
ids validation must report (empty set = valid).
"""

from __future__ import annotations

import json
import random

from pixelflow.graph.registry import ModuleRegistry
from pixelflow.graph.types import Edge, NodeInstance, ParamKind, PipelineGraph
from pixelflow.presets import segmentation_pipeline

WORDS = ["alpha", "blue", "copper", "delta", "ember", "flint", "gamma", "hazel"]


def _random_param_value(rng: random.Random, hp):
    if hp.kind is ParamKind.INT:
        lo = int(hp.min) if hp.min is not None else 0
        hi = int(hp.max) if hp.max is not None else lo + 100
        return rng.randint(lo, min(hi, lo + 1000))
    if hp.kind is ParamKind.FLOAT:
        lo = float(hp.min) if hp.min is not None else 0.0
        hi = float(hp.max) if hp.max is not None else lo + 1.0
        return lo + rng.random() * (hi - lo)
    if hp.kind is ParamKind.BOOL:
        return rng.choice([True, False])
    if hp.kind is ParamKind.ENUM:
        return rng.choice(list(hp.choices))
    return rng.choice(WORDS)


def random_library_graph(rng: random.Random, registry: ModuleRegistry) -> PipelineGraph:
    """Random valid graph over the shipped catalog: acyclic by construction,
    required inputs wired to a type-matching earlier output or declared as
    pipeline-level external inputs."""
    specs = registry.list_specs()
    n = rng.randint(1, 8)
    nodes: list[NodeInstance] = []
    edges: list[Edge] = []
    outputs_by_type: dict[str, list[tuple[str, str]]] = {}
    externals: list[str] = []
    for i in range(n):
        spec = rng.choice(specs)
        node_id = f"node{i:02d}"
        params = {}
        for hp in spec.hyperparams:
            roll = rng.random()
            if roll < 0.4:
                continue  # rely on the default
            if roll < 0.55:
                params[hp.name] = hp.default  # explicit default: same canonical bytes
            else:
                params[hp.name] = _random_param_value(rng, hp)
        nodes.append(NodeInstance(node_id, spec.id, spec.version, params))
        for port in spec.inputs:
            candidates = outputs_by_type.get(str(port.dtype), [])
            if candidates and (port.required or rng.random() < 0.5):
                src = rng.choice(candidates)
                edges.append(Edge.between(src[0], src[1], node_id, port.name))
            elif port.required:
                externals.append(f"{node_id}.{port.name}")
        for port in spec.outputs:
            outputs_by_type.setdefault(str(port.dtype), []).append((node_id, port.name))
    metadata = {}
    if externals:
        metadata["external_inputs"] = ",".join(externals)
    if rng.random() < 0.5:
        metadata[rng.choice(WORDS)] = rng.choice(WORDS)
    return PipelineGraph(name=f"random-{rng.randint(0, 1 << 30)}",
                         nodes=tuple(nodes), edges=tuple(edges), metadata=metadata)


def scramble_json(obj, rng: random.Random):
    """Recursively rebuild an object with shuffled key insertion order and,
    for the top-level node/edge lists, shuffled element order."""
    if isinstance(obj, dict):
        keys = list(obj)
        rng.shuffle(keys)
        return {k: scramble_json(obj[k], rng) for k in keys}
    if isinstance(obj, list):
        return [scramble_json(v, rng) for v in obj]
    return obj


def non_canonical_bytes(canonical_obj: dict, rng: random.Random) -> bytes:
    obj = scramble_json(canonical_obj, rng)
    obj["nodes"] = list(reversed(obj["nodes"]))
    rng.shuffle(obj["edges"])
    indent = rng.choice([None, 1, 4])
    return json.dumps(obj, indent=indent).encode("utf-8")


def _graph(name, nodes, edges, metadata=None):
    return PipelineGraph(name=name, nodes=tuple(nodes), edges=tuple(edges),
                         metadata=dict(metadata or {}))


def validation_fixtures() -> list[tuple[str, PipelineGraph, set[str]]]:
    fixtures: list[tuple[str, PipelineGraph, set[str]]] = []

    # --- valid graphs ----------------------------------------------------
    fixtures.append((
        "scenario_full",
        segmentation_pipeline([("car", 2), ("bicycle", 1)], refine=True, evaluate=True),
        set(),
    ))
    fixtures.append((
        "scenario_minimal",
        segmentation_pipeline([("truck", 1)]),
        set(),
    ))
    fixtures.append((
        "linear_chain",
        _graph("chain", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "synth.scene", 1),
            NodeInstance("c", "seg.coarse", 1),
        ], [
            Edge.between("a", "spec", "b", "spec"),
            Edge.between("b", "image", "c", "image"),
        ]),
        set(),
    ))
    fixtures.append((
        "fanout_diamond",
        _graph("diamond", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "synth.scene", 1),
            NodeInstance("c", "seg.coarse", 1),
            NodeInstance("d", "seg.refine", 1),
        ], [
            Edge.between("a", "spec", "b", "spec"),
            Edge.between("b", "image", "c", "image"),
            Edge.between("b", "image", "d", "image"),
            Edge.between("c", "mask", "d", "coarse"),
        ]),
        set(),
    ))
    fixtures.append((
        "external_inputs_ok",
        _graph("external", [
            NodeInstance("verify", "check.presence", 1),
        ], [], {"external_inputs": "verify.image,verify.spec"}),
        set(),
    ))
    fixtures.append(("empty", _graph("empty", [], []), set()))

    # --- single-rule violations -------------------------------------------
    fixtures.append((
        "cycle_two_nodes",
        _graph("cycle2", [
            NodeInstance("a", "seg.morph", 1),
            NodeInstance("b", "seg.morph", 1),
        ], [
            Edge.between("a", "mask", "b", "mask"),
            Edge.between("b", "mask", "a", "mask"),
        ]),
        {"cycle"},
    ))
    fixtures.append((
        "self_loop",
        _graph("loop1", [NodeInstance("a", "seg.morph", 1)],
               [Edge.between("a", "mask", "a", "mask")]),
        {"cycle"},
    ))
    fixtures.append((
        "text_into_image",
        _graph("mismatch", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "seg.coarse", 1),
        ], [Edge.between("a", "spec", "b", "image")]),
        {"type_mismatch"},
    ))
    fixtures.append((
        "mask_into_image",
        _graph("mismatch2", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "synth.scene", 1),
            NodeInstance("v", "check.presence", 1),
        ], [
            Edge.between("a", "spec", "b", "spec"),
            Edge.between("a", "spec", "v", "spec"),
            Edge.between("b", "mask", "v", "image"),
        ]),
        {"type_mismatch"},
    ))
    fixtures.append((
        "occupied_input",
        _graph("occupied", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "synth.prompt", 1, {"classes": "dog:1"}),
            NodeInstance("c", "synth.scene", 1),
        ], [
            Edge.between("a", "spec", "c", "spec"),
            Edge.between("b", "spec", "c", "spec"),
        ]),
        {"input_occupied"},
    ))
    fixtures.append((
        "unknown_module",
        _graph("ghostmod", [NodeInstance("a", "nope.nothing", 1)], []),
        {"unknown_module"},
    ))
    fixtures.append((
        "unknown_version",
        _graph("ghostver", [NodeInstance("a", "synth.prompt", 99)], []),
        {"unknown_module"},
    ))
    fixtures.append((
        "duplicate_node_id",
        _graph("dupe", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("a", "synth.prompt", 1),
        ], []),
        {"duplicate_node_id"},
    ))
    fixtures.append((
        "missing_required_input",
        _graph("lonely", [NodeInstance("gen", "synth.scene", 1)], []),
        {"missing_required_input"},
    ))
    fixtures.append((
        "unknown_hyperparam",
        _graph("badparam", [NodeInstance("a", "synth.prompt", 1, {"nope": 1})], []),
        {"bad_param"},
    ))
    fixtures.append((
        "param_out_of_bounds",
        _graph("oob", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "synth.scene", 1, {"class_dropout_rate": 2.0}),
        ], [Edge.between("a", "spec", "b", "spec")]),
        {"bad_param"},
    ))
    fixtures.append((
        "param_wrong_type",
        _graph("wrongtype", [NodeInstance("a", "synth.prompt", 1, {"width": "wide"})], []),
        {"bad_param"},
    ))
    fixtures.append((
        "float_for_int_param",
        _graph("floatint", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "synth.scene", 1),
            NodeInstance("c", "seg.coarse", 1),
            NodeInstance("d", "seg.refine", 1, {"n_points": 2.5}),
        ], [
            Edge.between("a", "spec", "b", "spec"),
            Edge.between("b", "image", "c", "image"),
            Edge.between("b", "image", "d", "image"),
            Edge.between("c", "mask", "d", "coarse"),
        ]),
        {"bad_param"},
    ))
    fixtures.append((
        "external_ghost_node",
        _graph("extghost", [NodeInstance("verify", "check.presence", 1)], [],
               {"external_inputs": "verify.image,verify.spec,ghost.port"}),
        {"bad_external_input"},
    ))
    fixtures.append((
        "external_is_output_port",
        _graph("extout", [NodeInstance("a", "synth.prompt", 1)], [],
               {"external_inputs": "a.spec"}),
        {"bad_external_input"},
    ))
    fixtures.append((
        "external_already_fed",
        _graph("extfed", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "synth.scene", 1),
        ], [Edge.between("a", "spec", "b", "spec")],
           {"external_inputs": "b.spec"}),
        {"bad_external_input"},
    ))

    # --- compound violations -----------------------------------------------
    fixtures.append((
        "edge_to_ghost_node",
        _graph("ghostedge", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "synth.scene", 1),
        ], [
            Edge.between("ghost", "spec", "b", "spec"),
            Edge.between("a", "spec", "ghost", "spec"),
        ]),
        {"unknown_node", "missing_required_input"},
    ))
    fixtures.append((
        "edge_from_ghost_port",
        _graph("ghostport", [
            NodeInstance("a", "synth.prompt", 1),
            NodeInstance("b", "synth.scene", 1),
        ], [Edge.between("a", "nope", "b", "spec")]),
        {"unknown_port"},
    ))
    fixtures.append((
        "cycle_plus_mismatch",
        _graph("multi", [
            NodeInstance("a", "seg.morph", 1),
            NodeInstance("b", "seg.morph", 1),
            NodeInstance("c", "seg.morph", 1),
            NodeInstance("p", "synth.prompt", 1),
            NodeInstance("s", "seg.coarse", 1),
        ], [
            Edge.between("a", "mask", "b", "mask"),
            Edge.between("b", "mask", "c", "mask"),
            Edge.between("c", "mask", "a", "mask"),
            Edge.between("p", "spec", "s", "image"),
        ]),
        {"cycle", "type_mismatch"},
    ))
    return fixtures
