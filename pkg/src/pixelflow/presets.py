"""Ready-made pipeline graphs for the standard synthesis scenarios.

``segmentation_pipeline`` wires the canonical five-stage dataset flow:
prompt -> generate -> verify -> gate -> segment (-> refine) -> cleanup,
optionally closing the loop with a mean-IoU evaluation against the
generator's ground truth.
"""

from __future__ import annotations

from .batch import DATASET_IMAGE_KEY, DATASET_MASK_KEY
from .graph.types import Edge, NodeInstance, PipelineGraph
from .modules.library import format_class_counts


def segmentation_pipeline(
    classes: list[tuple[str, int]],
    style: str = "noise",
    width: int = 160,
    height: int = 120,
    class_dropout_rate: float = 0.0,
    degrade_flip_rate: float = 0.0,
    refine: bool = False,
    n_points: int = 10,
    color_threshold: float = 40.0,
    close_radius: int = 1,
    min_component: int = 16,
    evaluate: bool = False,
    name: str = "segmentation-dataset",
) -> PipelineGraph:
    """Single-sample dataset pipeline over the shipped module library."""
    nodes = [
        NodeInstance("prompt", "synth.prompt", 1, {
            "classes": format_class_counts(classes),
            "style": style, "width": width, "height": height,
        }),
        NodeInstance("generate", "synth.scene", 1, {"class_dropout_rate": class_dropout_rate}),
        NodeInstance("verify", "check.presence", 1, {}),
        NodeInstance("keep", "flow.gate_image", 1, {}),
        NodeInstance("segment", "seg.coarse", 1, {"degrade_flip_rate": degrade_flip_rate}),
        NodeInstance("cleanup", "seg.morph", 1, {
            "close_radius": close_radius, "min_component": min_component,
        }),
    ]
    edges = [
        Edge.between("prompt", "spec", "generate", "spec"),
        Edge.between("prompt", "spec", "verify", "spec"),
        Edge.between("generate", "image", "verify", "image"),
        Edge.between("verify", "ok", "keep", "ok"),
        Edge.between("generate", "image", "keep", "value"),
        Edge.between("keep", "value", "segment", "image"),
    ]
    mask_src = "segment"
    if refine:
        nodes.append(NodeInstance("refine", "seg.refine", 1, {
            "n_points": n_points, "color_threshold": color_threshold,
        }))
        edges.append(Edge.between("keep", "value", "refine", "image"))
        edges.append(Edge.between("segment", "mask", "refine", "coarse"))
        mask_src = "refine"
    edges.append(Edge.between(mask_src, "mask", "cleanup", "mask"))
    if evaluate:
        nodes.append(NodeInstance("score", "eval.miou", 1, {}))
        edges.append(Edge.between("cleanup", "mask", "score", "pred"))
        edges.append(Edge.between("generate", "mask", "score", "truth"))
    metadata = {
        DATASET_IMAGE_KEY: "keep.value",
        DATASET_MASK_KEY: "cleanup.mask",
    }
    return PipelineGraph(name=name, nodes=tuple(nodes), edges=tuple(edges), metadata=metadata)
