"""Pipeline executor: dependency scheduling, parallel node execution,
content-addressed result caching, cancellation, and ordered progress events.

Determinism comes from module purity plus derived per-node seeds, never
from scheduling order: a node may start the moment its own predecessors
finish, and outputs are identical at any worker count.
"""

from __future__ import annotations

import threading
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .canonical import content_digest
from .errors import (
    FilterReject,
    InvalidGraph,
    MissingExternalInput,
    NodeExecutionError,
    PixelflowError,
    SchemaError,
    TypeMismatchAtRuntime,
)
from .graph.order import waves as wave_decomposition
from .graph.registry import ModuleRegistry
from .graph.types import NodeInstance, PipelineGraph
from .graph.validate import validate_graph
from .seeds import node_seed
from .values import Value

DEFAULT_CACHE_BYTES = 512 * 1024 * 1024

EVENT_JOB_QUEUED = "job_queued"
EVENT_NODE_STARTED = "node_started"
EVENT_NODE_FINISHED = "node_finished"
EVENT_JOB_FINISHED = "job_finished"
EVENT_JOB_FAILED = "job_failed"
EVENT_JOB_CANCELLED = "job_cancelled"

TERMINAL_EVENTS = {EVENT_JOB_FINISHED, EVENT_JOB_FAILED, EVENT_JOB_CANCELLED}


@dataclass(frozen=True)
class RunEvent:
    """One progress event; seq is strictly increasing per job."""

    seq: int
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "payload": self.payload, "seq": self.seq}

    @classmethod
    def from_json(cls, obj: Mapping) -> "RunEvent":
        return cls(seq=obj["seq"], kind=obj["kind"], payload=dict(obj["payload"]))


EventSink = Callable[[RunEvent], None]
ArtifactSink = Callable[[str, Mapping[str, Value]], None]


@dataclass(frozen=True)
class ExecutionPlan:
    """Wave decomposition: wave k nodes depend only on waves < k."""

    waves: tuple[tuple[str, ...], ...]

    def flatten(self) -> list[str]:
        return [n for wave in self.waves for n in wave]


def plan(graph: PipelineGraph) -> ExecutionPlan:
    """Plan a validated graph; flattening the waves gives topo_order."""
    try:
        return ExecutionPlan(waves=tuple(tuple(w) for w in wave_decomposition(graph)))
    except PixelflowError as exc:
        raise InvalidGraph(str(exc)) from exc


def cache_key(
    node: NodeInstance,
    input_digests: Mapping[str, str],
    job_seed: int,
    params: Mapping | None = None,
) -> str:
    """Content hash identifying one node execution.

    Covers module identity and version, the (materialized) params, the
    sorted input value digests, and the node's derived seed; equal keys
    imply identical outputs because modules are pure.
    """
    return content_digest({
        "module_id": node.module_id,
        "module_version": node.module_version,
        "params": dict(params if params is not None else node.params),
        "inputs": [[port, input_digests[port]] for port in sorted(input_digests)],
        "seed": node_seed(job_seed, node.node_id),
    })


class ResultCache:
    """Bounded content-addressed store of node outputs with LRU eviction."""

    def __init__(self, max_bytes: int = DEFAULT_CACHE_BYTES):
        self.max_bytes = max_bytes
        self._lock = threading.Lock()
        self._entries: OrderedDict[str, tuple[dict[str, Value], int]] = OrderedDict()
        self._total = 0

    def get(self, key: str) -> dict[str, Value] | None:
        with self._lock:
            hit = self._entries.get(key)
            if hit is None:
                return None
            self._entries.move_to_end(key)
            return hit[0]

    def put(self, key: str, outputs: Mapping[str, Value]) -> None:
        size = sum(v.nbytes() for v in outputs.values())
        if size > self.max_bytes:
            return
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                return
            self._entries[key] = (dict(outputs), size)
            self._total += size
            while self._total > self.max_bytes and self._entries:
                _, (_, evicted) = self._entries.popitem(last=False)
                self._total -= evicted

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    @property
    def total_bytes(self) -> int:
        with self._lock:
            return self._total


class CancelToken:
    """Cooperative cancellation handle shared between a caller and one run."""

    def __init__(self):
        self._flag = threading.Event()
        self._run: "_RunState | None" = None
        self.ack_seq: int | None = None

    def _attach(self, run: "_RunState") -> None:
        self._run = run
        if self._flag.is_set():
            self.ack_seq = run.cancel()

    def cancel(self) -> int | None:
        """Request cancellation. Returns the acknowledgment marker: the last
        event seq at acknowledgment time; no node_started may follow it."""
        self._flag.set()
        if self._run is not None:
            self.ack_seq = self._run.cancel()
        return self.ack_seq

    @property
    def cancelled(self) -> bool:
        return self._flag.is_set()


@dataclass
class ExecutionResult:
    status: str  # "finished" | "failed" | "cancelled"
    outputs: dict[tuple[str, str], Value] = field(default_factory=dict)
    failed_node: str | None = None
    error: str | None = None
    error_code: str | None = None
    events: list[RunEvent] = field(default_factory=list)

    @property
    def filter_rejected(self) -> bool:
        return self.error_code == FilterReject.code


class _RunState:
    def __init__(self, seq_base: int, sink: EventSink | None):
        self.lock = threading.Lock()
        self.done = threading.Condition(self.lock)
        self.seq = seq_base
        self.sink = sink
        self.events: list[RunEvent] = []
        self.cancelled = False
        self.failure: tuple[str, BaseException] | None = None
        self.inflight = 0

    def emit_locked(self, kind: str, payload: dict) -> RunEvent:
        event = RunEvent(seq=self.seq, kind=kind, payload=payload)
        self.seq += 1
        self.events.append(event)
        if self.sink is not None:
            self.sink(event)
        return event

    def cancel(self) -> int:
        with self.lock:
            self.cancelled = True
            return self.seq - 1


def execute(
    graph: PipelineGraph,
    registry: ModuleRegistry,
    external_inputs: Mapping[tuple[str, str], Value] | None = None,
    job_seed: int = 0,
    parallelism: int = 1,
    cache: ResultCache | None = None,
    event_sink: EventSink | None = None,
    cancel_token: CancelToken | None = None,
    artifact_sink: ArtifactSink | None = None,
    seq_base: int = 0,
) -> ExecutionResult:
    """Run every node of a validated graph, respecting dependencies.

    Emits node_started/node_finished per node plus exactly one terminal
    event. Node errors skip all downstream nodes and yield a failed result
    rather than raising; pre-flight problems (invalid graph, missing or
    mistyped external inputs) raise.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    report = validate_graph(graph, registry)
    if not report.ok:
        raise InvalidGraph("graph fails validation: " + ", ".join(sorted(report.rules())))

    external_inputs = dict(external_inputs or {})
    declared = set(graph.external_inputs())
    for key in external_inputs:
        if key not in declared:
            raise SchemaError(f"input {key[0]}.{key[1]} is not a declared external input")
    node_by_id = {n.node_id: n for n in graph.nodes}
    specs = {n.node_id: registry.get(n.module_id, n.module_version).spec for n in graph.nodes}
    for node_id, port in declared:
        port_spec = specs[node_id].input(port)
        supplied = external_inputs.get((node_id, port))
        if supplied is None:
            if port_spec.required:
                raise MissingExternalInput(f"external input {node_id}.{port} not supplied")
            continue
        if supplied.dtype() != port_spec.dtype:
            raise TypeMismatchAtRuntime(
                f"external input {node_id}.{port} is {supplied.dtype()}, expected {port_spec.dtype}"
            )

    plan(graph)  # defensive cycle check; validation already covers it
    preds = graph.predecessors()
    succs = graph.successors()
    feeds: dict[str, list] = {n.node_id: [] for n in graph.nodes}
    for e in graph.edges:
        feeds[e.dst.node].append(e)

    state = _RunState(seq_base, event_sink)
    if cancel_token is not None:
        cancel_token._attach(state)
    outputs: dict[tuple[str, str], Value] = {}
    finished: set[str] = set()
    indegree = {n: len(ps) for n, ps in preds.items()}
    pool = ThreadPoolExecutor(max_workers=parallelism, thread_name_prefix="pixelflow-node")

    def run_node(node_id: str) -> None:
        try:
            with state.lock:
                if state.cancelled or state.failure is not None:
                    return
                state.emit_locked(EVENT_NODE_STARTED, {"node_id": node_id})
            node = node_by_id[node_id]
            spec = specs[node_id]
            params = spec.default_params()
            for name, value in node.params.items():
                hp = spec.hyperparam(name)
                params[name] = hp.normalize(value) if hp else value
            inputs: dict[str, Value] = {}
            for edge in feeds[node_id]:
                inputs[edge.dst.port] = outputs[(edge.src.node, edge.src.port)]
            for (ext_node, ext_port), value in external_inputs.items():
                if ext_node == node_id:
                    inputs[ext_port] = value
            digests = {port: v.digest() for port, v in inputs.items()}
            key = cache_key(node, digests, job_seed, params)

            cached = cache.get(key) if cache is not None else None
            start = time.perf_counter()
            if cached is not None:
                result, cache_hit = cached, True
            else:
                try:
                    raw = registry.get(node.module_id, node.module_version).fn(
                        inputs, params, node_seed(job_seed, node_id)
                    )
                except PixelflowError:
                    raise
                except Exception as exc:  # wrap module bugs with their locus
                    raise NodeExecutionError(node_id, exc) from exc
                result = dict(raw)
                declared_out = {p.name for p in spec.outputs}
                if set(result) != declared_out:
                    raise TypeMismatchAtRuntime(
                        f"node {node_id!r} returned ports {sorted(result)}, declared {sorted(declared_out)}"
                    )
                for port_spec in spec.outputs:
                    got = result[port_spec.name].dtype()
                    if got != port_spec.dtype:
                        raise TypeMismatchAtRuntime(
                            f"node {node_id!r} output {port_spec.name!r} is {got}, declared {port_spec.dtype}"
                        )
                if cache is not None:
                    cache.put(key, result)
                cache_hit = False
            elapsed_ms = int(round((time.perf_counter() - start) * 1000))

            if artifact_sink is not None:
                artifact_sink(node_id, result)

            newly_ready: list[str] = []
            with state.lock:
                for port, value in result.items():
                    outputs[(node_id, port)] = value
                finished.add(node_id)
                state.emit_locked(EVENT_NODE_FINISHED, {
                    "node_id": node_id,
                    "outputs": {port: v.digest() for port, v in result.items()},
                    "elapsed_ms": elapsed_ms,
                    "cache_hit": cache_hit,
                })
                if not state.cancelled and state.failure is None:
                    for succ in sorted(succs[node_id]):
                        indegree[succ] -= 1
                        if indegree[succ] == 0:
                            newly_ready.append(succ)
            for succ in newly_ready:
                submit(succ)
        except BaseException as exc:
            with state.lock:
                if state.failure is None:
                    state.failure = (node_id, exc)
        finally:
            with state.lock:
                state.inflight -= 1
                state.done.notify_all()

    def submit(node_id: str) -> None:
        with state.lock:
            state.inflight += 1
        pool.submit(run_node, node_id)

    roots = sorted(n for n, deg in indegree.items() if deg == 0)
    for node_id in roots:
        submit(node_id)

    with state.lock:
        while state.inflight > 0:
            state.done.wait()
        if state.failure is not None:
            failed_node, exc = state.failure
            code = exc.code if isinstance(exc, PixelflowError) else "error"
            state.emit_locked(EVENT_JOB_FAILED, {
                "node_id": failed_node, "error": str(exc), "error_code": code,
            })
            result_status, error, error_code = "failed", str(exc), code
        elif state.cancelled:
            state.emit_locked(EVENT_JOB_CANCELLED, {})
            result_status, failed_node, error, error_code = "cancelled", None, None, None
        else:
            state.emit_locked(EVENT_JOB_FINISHED, {})
            result_status, failed_node, error, error_code = "finished", None, None, None
        events = list(state.events)
    pool.shutdown(wait=True)

    return ExecutionResult(
        status=result_status,
        outputs=dict(outputs),
        failed_node=failed_node,
        error=error,
        error_code=error_code,
        events=events,
    )
