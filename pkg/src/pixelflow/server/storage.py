"""File-backed persistence for pipelines, job metadata, events, artifacts.

Layout under the data directory:

    pipelines/{digest}.json          canonical pipeline bytes
    pipelines/{digest}.meta.json     name, owner tag, created_at
    jobs/{job_id}/meta.json          job record (rewritten on state change)
    jobs/{job_id}/events.ndjson      one event per line, append-only
    jobs/{job_id}/artifacts/{node}__{port}      payload bytes
    jobs/{job_id}/artifacts/{node}__{port}.meta.json

Metadata writes go through a temp-file rename so a crash never leaves a
half-written record.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path

from ..canonical import canonical_bytes, compact_line
from ..engine import RunEvent
from ..errors import UnknownPipeline
from ..graph.serialize import pipeline_digest


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class FileStore:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        (self.root / "pipelines").mkdir(parents=True, exist_ok=True)
        (self.root / "jobs").mkdir(parents=True, exist_ok=True)

    # --- pipelines -----------------------------------------------------

    def put_pipeline(self, canonical: bytes, name: str = "", owner: str = "") -> str:
        digest = pipeline_digest(canonical)
        path = self.root / "pipelines" / f"{digest}.json"
        if not path.exists():
            _atomic_write(path, canonical)
            meta = {"created_at": time.time(), "name": name, "owner": owner, "pipeline_id": digest}
            _atomic_write(self.root / "pipelines" / f"{digest}.meta.json", canonical_bytes(meta))
        return digest

    def get_pipeline(self, digest: str) -> bytes:
        path = self.root / "pipelines" / f"{digest}.json"
        if not path.exists():
            raise UnknownPipeline(f"no stored pipeline with id {digest!r}")
        return path.read_bytes()

    def has_pipeline(self, digest: str) -> bool:
        return (self.root / "pipelines" / f"{digest}.json").exists()

    # --- jobs ----------------------------------------------------------

    def job_dir(self, job_id: str) -> Path:
        return self.root / "jobs" / job_id

    def write_job_meta(self, job_id: str, meta: dict) -> None:
        d = self.job_dir(job_id)
        d.mkdir(parents=True, exist_ok=True)
        _atomic_write(d / "meta.json", canonical_bytes(meta))

    def read_job_meta(self, job_id: str) -> dict:
        return json.loads((self.job_dir(job_id) / "meta.json").read_text("utf-8"))

    def append_event(self, job_id: str, event: RunEvent) -> None:
        path = self.job_dir(job_id) / "events.ndjson"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(compact_line(event.to_json()) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def read_events(self, job_id: str) -> list[RunEvent]:
        path = self.job_dir(job_id) / "events.ndjson"
        if not path.exists():
            return []
        events = []
        for line in path.read_text("utf-8").splitlines():
            if line.strip():
                events.append(RunEvent.from_json(json.loads(line)))
        return events

    def list_job_ids(self) -> list[str]:
        jobs = self.root / "jobs"
        return sorted(p.name for p in jobs.iterdir() if (p / "meta.json").exists())

    # --- artifacts -------------------------------------------------------

    def write_artifact(self, job_id: str, node_id: str, port: str,
                       payload: bytes, content_type: str, digest: str, dtype: str) -> None:
        d = self.job_dir(job_id) / "artifacts"
        d.mkdir(parents=True, exist_ok=True)
        stem = f"{node_id}__{port}"
        _atomic_write(d / stem, payload)
        meta = {"content_type": content_type, "digest": digest, "dtype": dtype}
        _atomic_write(d / f"{stem}.meta.json", canonical_bytes(meta))

    def read_artifact(self, job_id: str, node_id: str, port: str) -> tuple[bytes, dict] | None:
        d = self.job_dir(job_id) / "artifacts"
        stem = f"{node_id}__{port}"
        payload = d / stem
        meta = d / f"{stem}.meta.json"
        if not payload.exists() or not meta.exists():
            return None
        return payload.read_bytes(), json.loads(meta.read_text("utf-8"))
