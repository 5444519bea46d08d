from .types import (
    BOOLEAN,
    IMAGE,
    MASK,
    NUMBER,
    TEXT,
    DataType,
    Edge,
    Endpoint,
    HyperparamSpec,
    Kind,
    ModuleSpec,
    NodeInstance,
    ParamKind,
    PipelineGraph,
    PortSpec,
    list_of,
)
from .registry import ModuleEntry, ModuleRegistry
from .validate import Diagnostic, ValidationReport, validate_graph
from .order import topo_order, waves
from .serialize import (
    deserialize_pipeline,
    graph_to_json,
    pipeline_digest,
    serialize_pipeline,
)

__all__ = [
    "BOOLEAN", "IMAGE", "MASK", "NUMBER", "TEXT",
    "DataType", "Edge", "Endpoint", "HyperparamSpec", "Kind", "ModuleSpec",
    "NodeInstance", "ParamKind", "PipelineGraph", "PortSpec", "list_of",
    "ModuleEntry", "ModuleRegistry",
    "Diagnostic", "ValidationReport", "validate_graph",
    "topo_order", "waves",
    "deserialize_pipeline", "graph_to_json", "pipeline_digest", "serialize_pipeline",
]
