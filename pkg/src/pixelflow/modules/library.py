"""The shipped module catalog: specs plus runner functions for the engine.

Every runner is a pure function of (inputs, params, seed). Gate modules
exist per data type because ports are statically typed; they raise
FilterReject when their boolean input is false, which batch drivers treat
as "skip this sample".
"""

from __future__ import annotations

import time

from ..errors import FilterReject, SchemaError
from ..graph.registry import ModuleRegistry
from ..graph.types import (
    BOOLEAN,
    IMAGE,
    MASK,
    NUMBER,
    TEXT,
    DataType,
    HyperparamSpec,
    ModuleSpec,
    ParamKind,
    PortSpec,
    list_of,
)
from ..values import ListValue, NumberValue, TextValue
from .metrics import compute_miou
from .palette import DEFAULT_PALETTE
from .scene import SceneSpec, prompt_build, scene_synthesize
from .segment import RefinerParams, coarse_segment, morph_postprocess, refine_mask
from .verify import presence_verify


def parse_class_counts(text: str) -> list[tuple[str, int]]:
    """Parse "car:2,bicycle" into [(car, 2), (bicycle, 1)]."""
    out: list[tuple[str, int]] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, _, count = chunk.partition(":")
        name = name.strip()
        if not name:
            raise SchemaError(f"empty class name in {text!r}")
        try:
            out.append((name, int(count) if count else 1))
        except ValueError as exc:
            raise SchemaError(f"bad instance count in {chunk!r}") from exc
    if not out:
        raise SchemaError("classes string names no classes")
    return out


def format_class_counts(classes: list[tuple[str, int]]) -> str:
    return ",".join(f"{n}:{c}" for n, c in classes)


def _run_prompt(inputs, params, seed):
    spec = prompt_build(
        parse_class_counts(params["classes"]),
        style=params["style"],
        canvas=(params["width"], params["height"]),
    )
    return {"spec": spec}


def _run_scene(inputs, params, seed):
    image, mask = scene_synthesize(
        inputs["spec"].text, seed, class_dropout_rate=params["class_dropout_rate"],
    )
    return {"image": image, "mask": mask}


def _run_presence(inputs, params, seed):
    expected = [name for name, _ in SceneSpec.from_text(inputs["spec"].text).classes]
    ok, report = presence_verify(
        inputs["image"], expected,
        min_fraction=params["min_fraction"], tolerance=params["tolerance"],
    )
    return {"ok": ok, "report": report}


def _run_coarse(inputs, params, seed):
    mask = coarse_segment(
        inputs["image"], degrade_flip_rate=params["degrade_flip_rate"], degrade_seed=seed,
    )
    return {"mask": mask}


def _run_refine(inputs, params, seed):
    mask = refine_mask(
        inputs["image"], inputs["coarse"],
        RefinerParams(n_points=params["n_points"], color_threshold=params["color_threshold"]),
        seed=seed,
    )
    return {"mask": mask}


def _run_morph(inputs, params, seed):
    mask = morph_postprocess(
        inputs["mask"], close_radius=params["close_radius"], min_component=params["min_component"],
    )
    return {"mask": mask}


def _run_miou(inputs, params, seed):
    report = compute_miou(inputs["pred"], inputs["truth"])
    if report.mean is None:
        raise SchemaError("both masks are all background; mean IoU undefined")
    return {"mean": NumberValue(report.mean), "report": TextValue(report.canonical_text())}


def _make_gate(dtype: DataType):
    def run(inputs, params, seed):
        if not inputs["ok"].value:
            raise FilterReject("gate rejected sample: verification returned false")
        return {"value": inputs["value"]}
    return run


def _run_const_number(inputs, params, seed):
    return {"value": NumberValue(params["value"])}


def _run_const_text(inputs, params, seed):
    return {"value": TextValue(params["text"])}


def _run_sleep(inputs, params, seed):
    time.sleep(params["ms"] / 1000.0)
    return {"value": inputs["value"]}


def _run_list_text(inputs, params, seed):
    items = [inputs["a"]]
    if "b" in inputs:
        items.append(inputs["b"])
    return {"value": ListValue(TEXT, items)}


def _run_join_text(inputs, params, seed):
    return {"value": TextValue(params["separator"].join(v.text for v in inputs["value"].items))}


def _specs() -> list[tuple[ModuleSpec, object]]:
    palette_classes = ",".join(DEFAULT_PALETTE.names())
    entries: list[tuple[ModuleSpec, object]] = [
        (ModuleSpec(
            id="synth.prompt", version=1, display_name="Scene Prompt",
            description="Builds the canonical scene description handed to the generator.",
            labels=frozenset({"synthesis", "prompt"}),
            outputs=(PortSpec("spec", TEXT, description="canonical scene spec"),),
            hyperparams=(
                HyperparamSpec("classes", ParamKind.STRING, "car:1"),
                HyperparamSpec("style", ParamKind.STRING, "noise"),
                HyperparamSpec("width", ParamKind.INT, 160, min=1, max=4096),
                HyperparamSpec("height", ParamKind.INT, 120, min=1, max=4096),
            ),
        ), _run_prompt),
        (ModuleSpec(
            id="synth.scene", version=1, display_name="Scene Generator",
            description=f"Procedural scene renderer with pixel-exact ground truth. Known classes: {palette_classes}.",
            labels=frozenset({"synthesis", "generation"}),
            inputs=(PortSpec("spec", TEXT, description="scene spec text"),),
            outputs=(PortSpec("image", IMAGE), PortSpec("mask", MASK, description="ground-truth mask")),
            hyperparams=(
                HyperparamSpec("class_dropout_rate", ParamKind.FLOAT, 0.0, min=0.0, max=1.0),
            ),
        ), _run_scene),
        (ModuleSpec(
            id="check.presence", version=1, display_name="Presence Verifier",
            description="Checks that every class requested by the spec is visible in the image.",
            labels=frozenset({"verification", "filtering"}),
            inputs=(PortSpec("image", IMAGE), PortSpec("spec", TEXT)),
            outputs=(PortSpec("ok", BOOLEAN), PortSpec("report", TEXT)),
            hyperparams=(
                HyperparamSpec("min_fraction", ParamKind.FLOAT, 0.002, min=0.0, max=1.0),
                HyperparamSpec("tolerance", ParamKind.FLOAT, 60.0, min=1.0, max=441.0),
            ),
        ), _run_presence),
        (ModuleSpec(
            id="seg.coarse", version=1, display_name="Coarse Segmenter",
            description="Nearest-palette-color labeling with optional degradation.",
            labels=frozenset({"segmentation"}),
            inputs=(PortSpec("image", IMAGE),),
            outputs=(PortSpec("mask", MASK),),
            hyperparams=(
                HyperparamSpec("degrade_flip_rate", ParamKind.FLOAT, 0.15, min=0.0, max=1.0),
            ),
        ), _run_coarse),
        (ModuleSpec(
            id="seg.refine", version=1, display_name="Point Refiner",
            description="Region-growing refinement seeded by random points from the coarse mask.",
            labels=frozenset({"segmentation", "refinement"}),
            inputs=(PortSpec("image", IMAGE), PortSpec("coarse", MASK)),
            outputs=(PortSpec("mask", MASK),),
            hyperparams=(
                HyperparamSpec("n_points", ParamKind.INT, 10, min=1, max=10000),
                HyperparamSpec("color_threshold", ParamKind.FLOAT, 40.0, min=1.0, max=441.0),
            ),
        ), _run_refine),
        (ModuleSpec(
            id="seg.morph", version=1, display_name="Morphological Cleanup",
            description="Per-class closing plus small-component removal.",
            labels=frozenset({"segmentation", "post-processing"}),
            inputs=(PortSpec("mask", MASK),),
            outputs=(PortSpec("mask", MASK),),
            hyperparams=(
                HyperparamSpec("close_radius", ParamKind.INT, 1, min=0, max=32),
                HyperparamSpec("min_component", ParamKind.INT, 16, min=0, max=1 << 24),
            ),
        ), _run_morph),
        (ModuleSpec(
            id="eval.miou", version=1, display_name="Mean IoU",
            description="Mean intersection-over-union between predicted and ground-truth masks.",
            labels=frozenset({"evaluation", "segmentation"}),
            inputs=(PortSpec("pred", MASK), PortSpec("truth", MASK)),
            outputs=(PortSpec("mean", NUMBER), PortSpec("report", TEXT)),
        ), _run_miou),
        (ModuleSpec(
            id="util.const_number", version=1, display_name="Constant Number",
            labels=frozenset({"utility"}),
            outputs=(PortSpec("value", NUMBER),),
            hyperparams=(HyperparamSpec("value", ParamKind.FLOAT, 0.0),),
        ), _run_const_number),
        (ModuleSpec(
            id="util.const_text", version=1, display_name="Constant Text",
            labels=frozenset({"utility"}),
            outputs=(PortSpec("value", TEXT),),
            hyperparams=(HyperparamSpec("text", ParamKind.STRING, ""),),
        ), _run_const_text),
        (ModuleSpec(
            id="util.sleep", version=1, display_name="Sleep",
            description="Passes its input through after a fixed delay; useful for load tests.",
            labels=frozenset({"utility"}),
            inputs=(PortSpec("value", NUMBER),),
            outputs=(PortSpec("value", NUMBER),),
            hyperparams=(HyperparamSpec("ms", ParamKind.INT, 100, min=0, max=600000),),
        ), _run_sleep),
        (ModuleSpec(
            id="util.list_text", version=1, display_name="Text List",
            description="Collects one or two texts into a list.",
            labels=frozenset({"utility", "list"}),
            inputs=(PortSpec("a", TEXT), PortSpec("b", TEXT, required=False)),
            outputs=(PortSpec("value", list_of(TEXT)),),
        ), _run_list_text),
        (ModuleSpec(
            id="util.join_text", version=1, display_name="Join Texts",
            description="Concatenates a text list with a separator.",
            labels=frozenset({"utility", "list"}),
            inputs=(PortSpec("value", list_of(TEXT)),),
            outputs=(PortSpec("value", TEXT),),
            hyperparams=(HyperparamSpec("separator", ParamKind.STRING, "\n"),),
        ), _run_join_text),
    ]
    for dtype, suffix in ((IMAGE, "image"), (MASK, "mask"), (TEXT, "text"), (NUMBER, "number")):
        entries.append((ModuleSpec(
            id=f"flow.gate_{suffix}", version=1, display_name=f"Gate ({suffix})",
            description="Passes the value through when ok is true, otherwise rejects the sample.",
            labels=frozenset({"flow", "filtering"}),
            inputs=(PortSpec("ok", BOOLEAN), PortSpec("value", dtype)),
            outputs=(PortSpec("value", dtype),),
        ), _make_gate(dtype)))
    return entries


def default_registry() -> ModuleRegistry:
    """Fresh registry holding the full shipped catalog."""
    registry = ModuleRegistry()
    for spec, fn in _specs():
        registry.register(spec, fn)
    return registry
