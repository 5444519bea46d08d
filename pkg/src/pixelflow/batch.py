"""Batch dataset generation: run one pipeline K times with derived
per-sample seeds, skip filter-rejected samples, and write the accepted
image/mask pairs as a dataset.

The graph stays a single-sample dataflow; batching is a driver loop. Which
outputs form a sample comes from two metadata keys on the pipeline:
``dataset_image`` and ``dataset_mask``, each a ``node.port`` reference.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .canonical import canonical_bytes
from .engine import ExecutionResult, ResultCache, execute
from .errors import NodeExecutionError, RetryBudgetExhausted, SchemaError
from .graph.registry import ModuleRegistry
from .graph.serialize import pipeline_digest, serialize_pipeline
from .graph.types import PipelineGraph
from .modules.dataset import DatasetManifest, dataset_write
from .seeds import sample_seed
from .values import ImageValue, MaskValue, NumberValue, Value

DATASET_IMAGE_KEY = "dataset_image"
DATASET_MASK_KEY = "dataset_mask"

DEFAULT_RETRY_FACTOR = 5


@dataclass
class BatchSummary:
    requested: int
    accepted: int
    attempts: int
    acceptance_rate: float
    mean_miou: float | None
    pipeline_digest: str
    attempt_log: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "acceptance_rate": self.acceptance_rate,
            "accepted": self.accepted,
            "attempt_log": self.attempt_log,
            "attempts": self.attempts,
            "mean_miou": self.mean_miou,
            "pipeline_digest": self.pipeline_digest,
            "requested": self.requested,
        }


def _dataset_ref(graph: PipelineGraph, key: str) -> tuple[str, str]:
    raw = graph.metadata.get(key, "")
    node_id, _, port = raw.partition(".")
    if not node_id or not port or graph.node(node_id) is None:
        raise SchemaError(
            f"pipeline metadata key {key!r} must name an existing 'node.port' output "
            f"(got {raw!r}); batch runs need it to know which outputs form a sample"
        )
    return node_id, port


def _miou_nodes(graph: PipelineGraph) -> list[str]:
    return sorted(n.node_id for n in graph.nodes if n.module_id == "eval.miou")


def run_batch(
    graph: PipelineGraph,
    registry: ModuleRegistry,
    out_dir: str | Path,
    seed: int = 0,
    count: int = 1,
    parallelism: int = 1,
    external_inputs: Mapping[tuple[str, str], Value] | None = None,
    overwrite: bool = False,
    retry_factor: int = DEFAULT_RETRY_FACTOR,
) -> tuple[BatchSummary, DatasetManifest]:
    """Generate ``count`` accepted samples, retrying rejected ones up to
    ``retry_factor * count`` total attempts.

    Attempt i runs with job seed mix(seed, i); accepted samples are written
    in attempt order, so results are independent of ``parallelism`` and the
    first N samples of a larger run equal a smaller run's output.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    image_ref = _dataset_ref(graph, DATASET_IMAGE_KEY)
    mask_ref = _dataset_ref(graph, DATASET_MASK_KEY)
    miou_nodes = _miou_nodes(graph)
    canonical = serialize_pipeline(graph, registry)
    digest = pipeline_digest(canonical)
    cache = ResultCache()

    def attempt(index: int) -> ExecutionResult:
        return execute(
            graph, registry,
            external_inputs=external_inputs,
            job_seed=sample_seed(seed, index),
            parallelism=1,
            cache=cache,
        )

    max_attempts = retry_factor * count
    samples: list[tuple[ImageValue, MaskValue]] = []
    miou_values: list[float] = []
    attempt_log: list[dict] = []
    attempts_done = 0

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        next_index = 0
        while len(samples) < count and next_index < max_attempts:
            block = list(range(next_index, min(next_index + max(1, parallelism), max_attempts)))
            next_index = block[-1] + 1
            for index, result in zip(block, pool.map(attempt, block)):
                attempts_done = index + 1
                if result.status == "finished":
                    image = result.outputs[image_ref]
                    mask = result.outputs[mask_ref]
                    if not isinstance(image, ImageValue) or not isinstance(mask, MaskValue):
                        raise SchemaError(
                            "dataset_image/dataset_mask metadata must reference "
                            "an Image and a Mask output"
                        )
                    samples.append((image, mask))
                    attempt_log.append({"accepted": True, "attempt": index})
                    for node_id in miou_nodes:
                        value = result.outputs.get((node_id, "mean"))
                        if isinstance(value, NumberValue):
                            miou_values.append(value.value)
                elif result.filter_rejected:
                    attempt_log.append({
                        "accepted": False, "attempt": index,
                        "reason": "filter_reject", "node": result.failed_node,
                    })
                else:
                    raise NodeExecutionError(result.failed_node or "?",
                                             Exception(result.error or "unknown failure"))
                if len(samples) >= count:
                    break

    if len(samples) < count:
        rate = len(samples) / attempts_done if attempts_done else 0.0
        raise RetryBudgetExhausted(
            f"only {len(samples)}/{count} samples accepted after {attempts_done} attempts "
            f"(acceptance rate {rate:.3f})",
            accepted=len(samples), attempts=attempts_done,
        )

    class_table = samples[0][1].class_table if samples else {}
    manifest = dataset_write(samples, out_dir, class_table,
                             pipeline_digest=digest, overwrite=overwrite)
    summary = BatchSummary(
        requested=count,
        accepted=len(samples),
        attempts=attempts_done,
        acceptance_rate=len(samples) / attempts_done,
        mean_miou=(sum(miou_values) / len(miou_values)) if miou_values else None,
        pipeline_digest=digest,
        attempt_log=attempt_log,
    )
    (Path(out_dir) / "summary.json").write_bytes(canonical_bytes(summary.to_json()))
    return summary, manifest
