"""Shared fixtures: a cheap text-module registry for engine/graph tests,
random graph generators, and an event-grammar checker."""

from __future__ import annotations

import random

import pytest

from pixelflow.engine import (
    EVENT_JOB_CANCELLED,
    EVENT_JOB_FAILED,
    EVENT_JOB_FINISHED,
    EVENT_JOB_QUEUED,
    EVENT_NODE_FINISHED,
    EVENT_NODE_STARTED,
    TERMINAL_EVENTS,
)
from pixelflow.graph.registry import ModuleRegistry
from pixelflow.graph.types import (
    NUMBER,
    TEXT,
    Edge,
    HyperparamSpec,
    ModuleSpec,
    NodeInstance,
    ParamKind,
    PipelineGraph,
    PortSpec,
)
from pixelflow.modules.library import default_registry
from pixelflow.values import NumberValue, TextValue


def _src_fn(inputs, params, seed):
    return {"value": TextValue(f"{params['tag']}|{seed}")}


def _upper_fn(inputs, params, seed):
    return {"value": TextValue(inputs["value"].text.upper())}


def _concat_fn(inputs, params, seed):
    return {"value": TextValue(f"({inputs['a'].text}+{inputs['b'].text})")}


def _fail_fn(inputs, params, seed):
    raise RuntimeError("boom")


def _slow_fn(inputs, params, seed):
    import time

    time.sleep(params["ms"] / 1000.0)
    return {"value": TextValue(inputs["value"].text)}


def _measure_fn(inputs, params, seed):
    return {"value": NumberValue(len(inputs["value"].text))}


def build_text_registry() -> ModuleRegistry:
    registry = ModuleRegistry()
    registry.register(ModuleSpec(
        id="t.src", version=1, display_name="Source",
        outputs=(PortSpec("value", TEXT),),
        hyperparams=(HyperparamSpec("tag", ParamKind.STRING, "x"),),
    ), _src_fn)
    registry.register(ModuleSpec(
        id="t.upper", version=1, display_name="Upper",
        inputs=(PortSpec("value", TEXT),),
        outputs=(PortSpec("value", TEXT),),
    ), _upper_fn)
    registry.register(ModuleSpec(
        id="t.concat", version=1, display_name="Concat",
        inputs=(PortSpec("a", TEXT), PortSpec("b", TEXT)),
        outputs=(PortSpec("value", TEXT),),
    ), _concat_fn)
    registry.register(ModuleSpec(
        id="t.fail", version=1, display_name="Always fails",
        inputs=(PortSpec("value", TEXT),),
        outputs=(PortSpec("value", TEXT),),
    ), _fail_fn)
    registry.register(ModuleSpec(
        id="t.slow", version=1, display_name="Slow identity",
        inputs=(PortSpec("value", TEXT),),
        outputs=(PortSpec("value", TEXT),),
        hyperparams=(HyperparamSpec("ms", ParamKind.INT, 50, min=0, max=60000),),
    ), _slow_fn)
    registry.register(ModuleSpec(
        id="t.measure", version=1, display_name="Text length",
        inputs=(PortSpec("value", TEXT),),
        outputs=(PortSpec("value", NUMBER),),
    ), _measure_fn)
    return registry


@pytest.fixture
def text_registry() -> ModuleRegistry:
    return build_text_registry()


@pytest.fixture
def registry() -> ModuleRegistry:
    return default_registry()


def random_text_graph(rng: random.Random, n_nodes: int | None = None) -> PipelineGraph:
    """Random valid executable DAG over the text modules. Edges only go from
    earlier to later nodes, so the graph is acyclic by construction."""
    n = n_nodes if n_nodes is not None else rng.randint(1, 9)
    nodes: list[NodeInstance] = []
    edges: list[Edge] = []
    text_outputs: list[tuple[str, str]] = []
    for i in range(n):
        node_id = f"n{i:02d}"
        if not text_outputs:
            kind = "t.src"
        else:
            kind = rng.choice(["t.src", "t.upper", "t.upper", "t.concat", "t.measure"])
        if kind == "t.src":
            nodes.append(NodeInstance(node_id, "t.src", 1, {"tag": f"tag{rng.randint(0, 99)}"}))
        elif kind == "t.upper":
            src = rng.choice(text_outputs)
            nodes.append(NodeInstance(node_id, "t.upper", 1))
            edges.append(Edge.between(src[0], src[1], node_id, "value"))
        elif kind == "t.measure":
            src = rng.choice(text_outputs)
            nodes.append(NodeInstance(node_id, "t.measure", 1))
            edges.append(Edge.between(src[0], src[1], node_id, "value"))
            continue  # number output, not reusable as text
        else:
            a = rng.choice(text_outputs)
            b = rng.choice(text_outputs)
            nodes.append(NodeInstance(node_id, "t.concat", 1))
            edges.append(Edge.between(a[0], a[1], node_id, "a"))
            edges.append(Edge.between(b[0], b[1], node_id, "b"))
        text_outputs.append((node_id, "value"))
    return PipelineGraph(name=f"random-{rng.randint(0, 1 << 30)}", nodes=tuple(nodes),
                         edges=tuple(edges), metadata={})


def assert_event_grammar(events, preds=None, allow_queued=True):
    """Event log invariants: gap-free seq, started-before-finished, exactly
    one terminal event at the end, and (given preds) schedule soundness."""
    assert events, "event log is empty"
    seqs = [e.seq for e in events]
    assert seqs == list(range(seqs[0], seqs[0] + len(events))), f"seq not gap-free: {seqs}"
    if allow_queued and events[0].kind == EVENT_JOB_QUEUED:
        body = events[1:]
    else:
        body = events
    assert body, "no events beyond job_queued"
    terminal = body[-1]
    assert terminal.kind in TERMINAL_EVENTS, f"last event {terminal.kind} is not terminal"
    for e in body[:-1]:
        assert e.kind in (EVENT_NODE_STARTED, EVENT_NODE_FINISHED), f"unexpected {e.kind}"
        assert e.kind not in TERMINAL_EVENTS
    started: dict[str, int] = {}
    finished: dict[str, int] = {}
    for e in body[:-1]:
        node = e.payload["node_id"]
        if e.kind == EVENT_NODE_STARTED:
            assert node not in started, f"{node} started twice"
            started[node] = e.seq
        else:
            assert node in started, f"{node} finished without starting"
            assert node not in finished, f"{node} finished twice"
            assert e.seq > started[node]
            finished[node] = e.seq
    if preds is not None:
        for node, seq in started.items():
            for pred in preds.get(node, ()):
                assert pred in finished and finished[pred] < seq, (
                    f"{node} started before predecessor {pred} finished"
                )
    return started, finished
