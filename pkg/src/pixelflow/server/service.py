"""Job queue service: FIFO scheduling onto engine workers, durable job
state, event fan-out to any number of subscribers with independent cursors.
"""

from __future__ import annotations

import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from ..engine import (
    EVENT_JOB_CANCELLED,
    EVENT_JOB_FAILED,
    EVENT_JOB_QUEUED,
    EVENT_NODE_FINISHED,
    TERMINAL_EVENTS,
    CancelToken,
    ExecutionResult,
    ResultCache,
    RunEvent,
    execute,
)
from ..errors import (
    AlreadyTerminal,
    NodeFailed,
    NotReady,
    PayloadTooLarge,
    PixelflowError,
    QueueFull,
    SchemaError,
    UnknownJob,
    UnknownNode,
    UnknownPort,
    ValidationFailed,
)
from ..graph.registry import ModuleRegistry
from ..graph.serialize import deserialize_pipeline, serialize_pipeline
from ..graph.types import PipelineGraph
from ..graph.validate import validate_graph
from ..modules.library import default_registry
from ..values import Value, value_from_literal
from .storage import FileStore

QUEUED = "queued"
RUNNING = "running"
FINISHED = "finished"
FAILED = "failed"
CANCELLED = "cancelled"

TERMINAL_STATES = {FINISHED, FAILED, CANCELLED}

DEFAULT_QUEUE_CAP = 1000
DEFAULT_PAYLOAD_LIMIT = 64 * 1024 * 1024


def _now() -> float:
    return time.time()


@dataclass
class JobRecord:
    job_id: str
    arrival: int
    pipeline_id: str
    seed: int
    client_id: str
    external_literals: dict[str, object]
    state: str = QUEUED
    submitted_at: float = 0.0
    started_at: float | None = None
    ended_at: float | None = None
    error: str | None = None
    error_code: str | None = None
    failed_node: str | None = None
    total_nodes: int = 0
    finished_nodes: int = 0
    events: list[RunEvent] = field(default_factory=list)
    cond: threading.Condition = field(default_factory=threading.Condition)
    cancel_token: CancelToken = field(default_factory=CancelToken)

    def meta(self) -> dict:
        return {
            "arrival": self.arrival,
            "client_id": self.client_id,
            "ended_at": self.ended_at,
            "error": self.error,
            "error_code": self.error_code,
            "external_inputs": self.external_literals,
            "failed_node": self.failed_node,
            "job_id": self.job_id,
            "pipeline_id": self.pipeline_id,
            "seed": self.seed,
            "started_at": self.started_at,
            "state": self.state,
            "submitted_at": self.submitted_at,
            "total_nodes": self.total_nodes,
        }

    @classmethod
    def from_meta(cls, meta: dict) -> "JobRecord":
        job = cls(
            job_id=meta["job_id"],
            arrival=meta["arrival"],
            pipeline_id=meta["pipeline_id"],
            seed=meta["seed"],
            client_id=meta.get("client_id", ""),
            external_literals=dict(meta.get("external_inputs", {})),
            state=meta["state"],
        )
        job.submitted_at = meta.get("submitted_at", 0.0)
        job.started_at = meta.get("started_at")
        job.ended_at = meta.get("ended_at")
        job.error = meta.get("error")
        job.error_code = meta.get("error_code")
        job.failed_node = meta.get("failed_node")
        job.total_nodes = meta.get("total_nodes", 0)
        return job


class JobService:
    """Single-process server core: registry, store, queue, worker pool."""

    def __init__(
        self,
        data_dir,
        workers: int = 2,
        node_parallelism: int = 2,
        queue_cap: int = DEFAULT_QUEUE_CAP,
        cache_bytes: int = 512 * 1024 * 1024,
        payload_limit: int = DEFAULT_PAYLOAD_LIMIT,
        registry: ModuleRegistry | None = None,
    ):
        self.store = FileStore(data_dir)
        self.registry = registry if registry is not None else default_registry()
        self.cache = ResultCache(cache_bytes)
        self.queue_cap = queue_cap
        self.payload_limit = payload_limit
        self.node_parallelism = node_parallelism
        self._lock = threading.Lock()
        self._queue_cond = threading.Condition(self._lock)
        self._queue: deque[str] = deque()
        self._jobs: dict[str, JobRecord] = {}
        self._arrival = 0
        self._shutdown = False
        self._workers = [
            threading.Thread(target=self._worker, name=f"pixelflow-job-{i}", daemon=True)
            for i in range(max(1, workers))
        ]
        self._recover()
        for t in self._workers:
            t.start()

    # --- lifecycle -------------------------------------------------------

    def _recover(self) -> None:
        """Reload persisted jobs: re-queue queued ones, fail interrupted
        running ones with an audit event, keep terminal ones as-is."""
        for job_id in self.store.list_job_ids():
            try:
                job = JobRecord.from_meta(self.store.read_job_meta(job_id))
            except Exception:
                continue
            job.events = self.store.read_events(job_id)
            job.finished_nodes = sum(1 for e in job.events if e.kind == EVENT_NODE_FINISHED)
            if job.state == RUNNING:
                job.state = FAILED
                job.error = "interrupted"
                job.error_code = "interrupted"
                job.ended_at = _now()
                audit = RunEvent(seq=len(job.events), kind=EVENT_JOB_FAILED,
                                 payload={"node_id": None, "error": "interrupted",
                                          "error_code": "interrupted"})
                job.events.append(audit)
                self.store.append_event(job_id, audit)
                self.store.write_job_meta(job_id, job.meta())
            self._jobs[job_id] = job
            self._arrival = max(self._arrival, job.arrival + 1)
        for job in sorted(self._jobs.values(), key=lambda j: j.arrival):
            if job.state == QUEUED:
                self._queue.append(job.job_id)

    def stop(self) -> None:
        with self._lock:
            self._shutdown = True
            self._queue_cond.notify_all()
        for job in list(self._jobs.values()):
            job.cancel_token.cancel()
        for t in self._workers:
            t.join(timeout=30)

    # --- submission --------------------------------------------------------

    def store_pipeline(self, raw: bytes, name_hint: str = "", owner: str = "") -> str:
        """Canonicalize, validate, and persist pipeline bytes; idempotent."""
        if len(raw) > self.payload_limit:
            raise PayloadTooLarge(f"pipeline exceeds {self.payload_limit} bytes")
        graph = deserialize_pipeline(raw)
        report = validate_graph(graph, self.registry)
        if not report.ok:
            raise ValidationFailed(report)
        canonical = serialize_pipeline(graph, self.registry)
        return self.store.put_pipeline(canonical, name=name_hint or graph.name, owner=owner)

    def load_pipeline(self, pipeline_id: str) -> bytes:
        return self.store.get_pipeline(pipeline_id)

    def _decode_inputs(self, graph: PipelineGraph, literals: Mapping[str, object]) -> dict[tuple[str, str], Value]:
        declared = {f"{n}.{p}": (n, p) for n, p in graph.external_inputs()}
        specs = {n.node_id: self.registry.get(n.module_id, n.module_version).spec for n in graph.nodes}
        out: dict[tuple[str, str], Value] = {}
        for key, literal in literals.items():
            if key not in declared:
                raise SchemaError(f"input {key!r} is not a declared external input")
            node_id, port = declared[key]
            dtype = specs[node_id].input(port).dtype
            out[(node_id, port)] = value_from_literal(dtype, literal)
        return out

    def submit(
        self,
        pipeline_bytes: bytes | None = None,
        pipeline_id: str | None = None,
        inputs: Mapping[str, object] | None = None,
        seed: int = 0,
        client_id: str = "",
    ) -> tuple[str, int]:
        """Validate, persist, and enqueue a job; returns (job_id, position)."""
        if pipeline_id is not None:
            canonical = self.store.get_pipeline(pipeline_id)
            digest = pipeline_id
        elif pipeline_bytes is not None:
            digest = self.store_pipeline(pipeline_bytes)
            canonical = self.store.get_pipeline(digest)
        else:
            raise SchemaError("submit requires pipeline bytes or a pipeline_id")
        graph = deserialize_pipeline(canonical)
        report = validate_graph(graph, self.registry)
        if not report.ok:
            raise ValidationFailed(report)
        literals = dict(inputs or {})
        self._decode_inputs(graph, literals)  # type-checks; raises SchemaError

        job_id = uuid.uuid4().hex
        with self._lock:
            if len(self._queue) >= self.queue_cap:
                raise QueueFull(f"queue holds {len(self._queue)} jobs (cap {self.queue_cap})")
            running = sum(1 for j in self._jobs.values() if j.state == RUNNING)
            position = len(self._queue) + running
            job = JobRecord(
                job_id=job_id,
                arrival=self._arrival,
                pipeline_id=digest,
                seed=seed,
                client_id=client_id,
                external_literals=literals,
                total_nodes=len(graph.nodes),
            )
            self._arrival += 1
            job.submitted_at = _now()
            self._jobs[job_id] = job
            self._queue.append(job_id)
            self.store.write_job_meta(job_id, job.meta())
            self._append_event(job, RunEvent(seq=0, kind=EVENT_JOB_QUEUED, payload={"position": position}))
            self._queue_cond.notify()
        return job_id, position

    # --- workers ------------------------------------------------------------

    def _append_event(self, job: JobRecord, event: RunEvent) -> None:
        with job.cond:
            job.events.append(event)
            if event.kind == EVENT_NODE_FINISHED:
                job.finished_nodes += 1
            self.store.append_event(job.job_id, event)
            job.cond.notify_all()

    def _worker(self) -> None:
        while True:
            with self._lock:
                while not self._shutdown and not self._queue:
                    self._queue_cond.wait()
                if self._shutdown:
                    return
                job_id = self._queue.popleft()
                job = self._jobs[job_id]
                if job.state != QUEUED:  # cancelled while queued
                    continue
                job.state = RUNNING
                # timestamp under the lock: dequeues are serialized, so
                # started_at order always equals arrival order
                job.started_at = max(_now(), job.submitted_at)
                self.store.write_job_meta(job_id, job.meta())
            self._run_job(job)

    def _run_job(self, job: JobRecord) -> None:
        try:
            graph = deserialize_pipeline(self.store.get_pipeline(job.pipeline_id))
            external = self._decode_inputs(graph, job.external_literals)

            def artifact_sink(node_id: str, outputs: Mapping[str, Value]) -> None:
                for port, value in outputs.items():
                    payload, content_type = value.payload()
                    self.store.write_artifact(job.job_id, node_id, port, payload,
                                              content_type, value.digest(), str(value.dtype()))

            result = execute(
                graph,
                self.registry,
                external_inputs=external,
                job_seed=job.seed,
                parallelism=self.node_parallelism,
                cache=self.cache,
                event_sink=lambda event: self._append_event(job, event),
                cancel_token=job.cancel_token,
                artifact_sink=artifact_sink,
                seq_base=len(job.events),
            )
            self._finish_job(job, result)
        except Exception as exc:  # pre-flight or internal failure
            with self._lock:
                job.state = FAILED
                job.error = str(exc)
                job.error_code = exc.code if isinstance(exc, PixelflowError) else "error"
                job.ended_at = max(_now(), job.started_at or 0.0)
                self.store.write_job_meta(job.job_id, job.meta())
            self._append_event(job, RunEvent(
                seq=len(job.events), kind=EVENT_JOB_FAILED,
                payload={"node_id": None, "error": job.error, "error_code": job.error_code},
            ))

    def _finish_job(self, job: JobRecord, result: ExecutionResult) -> None:
        with self._lock:
            job.state = {"finished": FINISHED, "failed": FAILED, "cancelled": CANCELLED}[result.status]
            job.failed_node = result.failed_node
            job.error = result.error
            job.error_code = result.error_code
            job.ended_at = max(_now(), job.started_at or 0.0)
            self.store.write_job_meta(job.job_id, job.meta())

    # --- queries ------------------------------------------------------------

    def _job(self, job_id: str) -> JobRecord:
        job = self._jobs.get(job_id)
        if job is None:
            raise UnknownJob(f"no job with id {job_id!r}")
        return job

    def list_modules(self) -> list[dict]:
        return [spec.to_json() for spec in self.registry.list_specs()]

    def job_status(self, job_id: str) -> dict:
        job = self._job(job_id)
        with self._lock:
            position = None
            if job.state == QUEUED:
                running = sum(1 for j in self._jobs.values() if j.state == RUNNING)
                ahead = sum(1 for qid in self._queue
                            if self._jobs[qid].arrival < job.arrival and self._jobs[qid].state == QUEUED)
                position = ahead + running
            return {
                "client_id": job.client_id,
                "ended_at": job.ended_at,
                "error": job.error,
                "error_code": job.error_code,
                "failed_node": job.failed_node,
                "job_id": job.job_id,
                "pipeline_id": job.pipeline_id,
                "progress": {"finished": job.finished_nodes, "total": job.total_nodes},
                "queue_position": position,
                "seed": job.seed,
                "started_at": job.started_at,
                "state": job.state,
                "submitted_at": job.submitted_at,
            }

    def cancel(self, job_id: str) -> dict:
        job = self._job(job_id)
        with self._lock:
            if job.state in TERMINAL_STATES:
                raise AlreadyTerminal(f"job {job_id} is already {job.state}")
            if job.state == QUEUED:
                try:
                    self._queue.remove(job_id)
                except ValueError:
                    pass
                job.state = CANCELLED
                job.ended_at = _now()
                self.store.write_job_meta(job_id, job.meta())
                self._append_event(job, RunEvent(
                    seq=len(job.events), kind=EVENT_JOB_CANCELLED, payload={},
                ))
                return {"result": "cancelled", "ack_seq": len(job.events) - 1}
        ack = job.cancel_token.cancel()
        return {"result": "cancelling", "ack_seq": ack}

    def artifact(self, job_id: str, node_id: str, port: str) -> tuple[bytes, str]:
        job = self._job(job_id)
        graph = deserialize_pipeline(self.store.get_pipeline(job.pipeline_id))
        node = graph.node(node_id)
        if node is None:
            raise UnknownNode(f"job has no node {node_id!r}")
        spec = self.registry.get(node.module_id, node.module_version).spec
        if spec.output(port) is None:
            raise UnknownPort(f"node {node_id!r} has no output port {port!r}")
        stored = self.store.read_artifact(job_id, node_id, port)
        if stored is None:
            if job.failed_node == node_id:
                raise NodeFailed(f"node {node_id!r} failed: {job.error}")
            raise NotReady(f"node {node_id!r} has not finished in job {job_id}")
        payload, meta = stored
        return payload, meta["content_type"]

    def events_since(self, job_id: str, since: int = 0) -> Iterator[RunEvent]:
        """Yield events with seq >= since in order, following live until the
        terminal event. Replays the full log for terminal jobs."""
        job = self._job(job_id)
        cursor = since
        while True:
            with job.cond:
                while len(job.events) <= cursor and job.state not in TERMINAL_STATES:
                    job.cond.wait(timeout=0.5)
                    if self._shutdown:
                        return
                batch = job.events[cursor:]
            for event in batch:
                yield event
                cursor = event.seq + 1
                if event.kind in TERMINAL_EVENTS:
                    return
            if not batch:
                with job.cond:
                    if job.state in TERMINAL_STATES and len(job.events) <= cursor:
                        return
