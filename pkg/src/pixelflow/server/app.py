"""HTTP surface over the job service.

All JSON responses are rendered in the canonical form so identical state
always yields identical payload bytes. The event channel is a long-lived
newline-delimited JSON stream, one event per line, resumable via
``?since=SEQ``.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.responses import StreamingResponse

from ..canonical import canonical_bytes, compact_line
from ..errors import (
    AlreadyTerminal,
    NodeFailed,
    NotReady,
    ParseError,
    PayloadTooLarge,
    PixelflowError,
    QueueFull,
    SchemaError,
    UnknownJob,
    UnknownNode,
    UnknownPipeline,
    UnknownPort,
    UnsupportedVersion,
    ValidationFailed,
)
from ..graph.serialize import deserialize_pipeline
from ..graph.validate import validate_graph
from .service import JobService

API = "/api/v1"

_STATUS_BY_CODE = {
    ParseError.code: 400,
    SchemaError.code: 400,
    UnsupportedVersion.code: 400,
    ValidationFailed.code: 422,
    PayloadTooLarge.code: 413,
    QueueFull.code: 429,
    UnknownJob.code: 404,
    UnknownPipeline.code: 404,
    UnknownNode.code: 404,
    UnknownPort.code: 404,
    NotReady.code: 409,
    NodeFailed.code: 409,
}


def _json_response(payload, status: int = 200) -> Response:
    return Response(content=canonical_bytes(payload), status_code=status,
                    media_type="application/json")


def _error_response(exc: PixelflowError) -> Response:
    body = {"error": {"code": exc.code, "message": exc.message}}
    if isinstance(exc, ValidationFailed):
        body["error"]["report"] = exc.report.to_json()
    return _json_response(body, _STATUS_BY_CODE.get(exc.code, 500))


def create_app(service: JobService) -> FastAPI:
    from contextlib import asynccontextmanager

    @asynccontextmanager
    async def lifespan(_app):
        yield
        service.stop()

    app = FastAPI(title="pixelflow", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.service = service

    @app.exception_handler(PixelflowError)
    async def handle_domain_error(request: Request, exc: PixelflowError):
        return _error_response(exc)

    async def read_body(request: Request) -> bytes:
        body = await request.body()
        if len(body) > service.payload_limit:
            raise PayloadTooLarge(f"request body exceeds {service.payload_limit} bytes")
        return body

    def parse_json(body: bytes) -> dict:
        try:
            return json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError(f"request body is not valid JSON: {exc}") from exc

    @app.get(API + "/modules")
    def modules():
        return _json_response({"modules": service.list_modules()})

    @app.post(API + "/pipelines")
    async def store_pipeline(request: Request):
        body = await read_body(request)
        owner = request.headers.get("x-client-id", "")
        pipeline_id = service.store_pipeline(body, owner=owner)
        return _json_response({"pipeline_id": pipeline_id})

    @app.get(API + "/pipelines/{pipeline_id}")
    def load_pipeline(pipeline_id: str):
        return Response(content=service.load_pipeline(pipeline_id),
                        media_type="application/json")

    @app.post(API + "/pipelines/validate")
    async def validate(request: Request):
        body = await read_body(request)
        graph = deserialize_pipeline(body)  # ParseError/SchemaError -> 400
        report = validate_graph(graph, service.registry)
        return _json_response(report.to_json())

    @app.post(API + "/jobs")
    async def submit(request: Request):
        body = parse_json(await read_body(request))
        if not isinstance(body, dict):
            raise SchemaError("job submission must be an object")
        pipeline = body.get("pipeline")
        pipeline_id = body.get("pipeline_id")
        if pipeline is None and pipeline_id is None:
            raise SchemaError("job submission requires 'pipeline' or 'pipeline_id'")
        seed = body.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise SchemaError("seed must be an integer")
        inputs = body.get("inputs", {})
        if not isinstance(inputs, dict):
            raise SchemaError("inputs must map 'node.port' to literals")
        client_id = body.get("client_id") or request.headers.get("x-client-id", "")
        job_id, position = service.submit(
            pipeline_bytes=compact_line(pipeline).encode("utf-8") if pipeline is not None else None,
            pipeline_id=pipeline_id,
            inputs=inputs,
            seed=seed,
            client_id=client_id,
        )
        return _json_response({"job_id": job_id, "position": position})

    @app.get(API + "/jobs/{job_id}")
    def job_status(job_id: str):
        return _json_response(service.job_status(job_id))

    @app.post(API + "/jobs/{job_id}/cancel")
    def cancel(job_id: str):
        try:
            return _json_response(service.cancel(job_id))
        except AlreadyTerminal as exc:
            return _json_response({"result": "already_terminal", "detail": exc.message})

    @app.get(API + "/jobs/{job_id}/artifacts/{node_id}/{port}")
    def artifact(job_id: str, node_id: str, port: str):
        payload, content_type = service.artifact(job_id, node_id, port)
        return Response(content=payload, media_type=content_type)

    @app.get(API + "/jobs/{job_id}/events")
    def events(job_id: str, since: int = 0):
        service.job_status(job_id)  # raises UnknownJob before streaming

        def stream():
            for event in service.events_since(job_id, since):
                yield compact_line(event.to_json()) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    return app
