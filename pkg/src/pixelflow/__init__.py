"""pixelflow: typed node-based dataflow pipelines that synthesize
semantic-segmentation datasets, with a deterministic engine, a job-queue
server, and a local batch CLI."""

from .engine import (
    CancelToken,
    ExecutionPlan,
    ExecutionResult,
    ResultCache,
    RunEvent,
    cache_key,
    execute,
    plan,
)
from .graph import (
    BOOLEAN,
    IMAGE,
    MASK,
    NUMBER,
    TEXT,
    DataType,
    Edge,
    Endpoint,
    HyperparamSpec,
    ModuleRegistry,
    ModuleSpec,
    NodeInstance,
    ParamKind,
    PipelineGraph,
    PortSpec,
    ValidationReport,
    deserialize_pipeline,
    list_of,
    pipeline_digest,
    serialize_pipeline,
    topo_order,
    validate_graph,
    waves,
)
from .modules import (
    DEFAULT_PALETTE,
    MiouReport,
    Palette,
    RefinerParams,
    SceneSpec,
    compute_miou,
    coarse_segment,
    dataset_write,
    default_registry,
    morph_postprocess,
    presence_verify,
    prompt_build,
    refine_mask,
    scene_synthesize,
    synthesize_scene,
)
from .batch import run_batch
from .presets import segmentation_pipeline
from .seeds import mix64, node_seed, sample_seed
from .values import (
    BooleanValue,
    ImageValue,
    ListValue,
    MaskValue,
    NumberValue,
    TextValue,
    Value,
)

__version__ = "0.1.0"
