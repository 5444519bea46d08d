from .palette import DEFAULT_PALETTE, Palette, PaletteEntry, ShapeFamily, rgb_distance
from .scene import Placement, SceneResult, SceneSpec, prompt_build, scene_synthesize, synthesize_scene
from .verify import presence_verify
from .segment import RefinerParams, coarse_segment, morph_postprocess, refine_mask
from .metrics import MiouReport, compute_miou
from .dataset import DatasetManifest, dataset_write
from .library import default_registry, format_class_counts, parse_class_counts

__all__ = [
    "DEFAULT_PALETTE", "Palette", "PaletteEntry", "ShapeFamily", "rgb_distance",
    "Placement", "SceneResult", "SceneSpec", "prompt_build", "scene_synthesize", "synthesize_scene",
    "presence_verify",
    "RefinerParams", "coarse_segment", "morph_postprocess", "refine_mask",
    "MiouReport", "compute_miou",
    "DatasetManifest", "dataset_write",
    "default_registry", "format_class_counts", "parse_class_counts",
]
