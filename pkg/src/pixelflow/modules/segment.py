"""Mask producers: threshold segmentation, point-seeded region-growing
refinement, and morphological cleanup.

The coarse stage labels each pixel with the nearest palette color, then
degrades the result by randomly flipping labeled pixels to background, so
refinement has measurable work to do. Refinement samples points from the
coarse mask and grows color-coherent regions in the image, which recovers
whole instances from partial evidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import DimensionMismatch
from ..seeds import MASK64
from ..values import ImageValue, MaskValue
from .palette import DEFAULT_PALETTE, Palette

ASSIGN_TOLERANCE = 60.0

# 4-connectivity structuring element for component labeling
FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class RefinerParams:
    n_points: int = 10
    color_threshold: float = 40.0
    connectivity: int = 4

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.connectivity != 4:
            raise ValueError("only 4-connectivity is supported")


def coarse_segment(
    image: ImageValue,
    degrade_flip_rate: float = 0.15,
    degrade_seed: int = 0,
    palette: Palette = DEFAULT_PALETTE,
) -> MaskValue:
    """Nearest-palette-color labeling with controlled degradation.

    Each pixel takes the class whose base color is nearest within
    ASSIGN_TOLERANCE, else background; labeled pixels are then independently
    flipped to background with probability ``degrade_flip_rate``.
    """
    px = image.pixels.astype(np.int64)
    ids = sorted(palette.base_colors())
    colors = np.array([palette.base_colors()[i] for i in ids], dtype=np.int64)
    d2 = ((px[:, :, None, :] - colors[None, None, :, :]) ** 2).sum(axis=3)
    nearest = d2.argmin(axis=2)
    within = d2.min(axis=2) <= ASSIGN_TOLERANCE * ASSIGN_TOLERANCE
    mask = np.where(within, np.array(ids, dtype=np.uint8)[nearest], 0).astype(np.uint8)

    if degrade_flip_rate > 0:
        rng = np.random.default_rng(degrade_seed & MASK64)
        u = rng.random(mask.shape)
        mask[(mask != 0) & (u < degrade_flip_rate)] = 0

    return MaskValue(mask, palette.class_table())


def _threshold_components(image_px: np.ndarray, seed_color: np.ndarray, threshold: float) -> np.ndarray:
    """Label the 4-connected components of {pixels within ``threshold`` of
    ``seed_color``}. The grown region of a point is its component."""
    d2 = ((image_px.astype(np.int64) - seed_color.astype(np.int64)) ** 2).sum(axis=2)
    labels, _ = ndimage.label(d2 <= threshold * threshold, structure=FOUR_CONN)
    return labels


def refine_mask(
    image: ImageValue,
    coarse: MaskValue,
    params: RefinerParams = RefinerParams(),
    seed: int = 0,
) -> MaskValue:
    """Rebuild each class region from randomly sampled coarse-mask points.

    Per nonzero class (ascending id): sample min(n_points, available)
    distinct foreground pixels, grow a color-coherent region from each, and
    take the union. A pixel claimed by several classes goes to the smaller
    class id.
    """
    if (image.width, image.height) != (coarse.width, coarse.height):
        raise DimensionMismatch(
            f"image {image.width}x{image.height} vs mask {coarse.width}x{coarse.height}"
        )
    rng = np.random.default_rng(seed & MASK64)
    out = np.zeros_like(coarse.classes)
    for class_id in coarse.present_ids():
        ys, xs = np.nonzero(coarse.classes == class_id)
        n = min(params.n_points, len(ys))
        if n == 0:
            continue
        picked = rng.choice(len(ys), size=n, replace=False)
        region = np.zeros(out.shape, dtype=bool)
        # points sharing an exact seed color share one component labeling
        by_color: dict[bytes, np.ndarray] = {}
        for idx in picked:
            y, x = int(ys[idx]), int(xs[idx])
            color = image.pixels[y, x]
            labels = by_color.get(color.tobytes())
            if labels is None:
                labels = _threshold_components(image.pixels, color, params.color_threshold)
                by_color[color.tobytes()] = labels
            region |= labels == labels[y, x]
        out[region & (out == 0)] = class_id
    return MaskValue(out, coarse.class_table)


def morph_postprocess(mask: MaskValue, close_radius: int = 1, min_component: int = 16) -> MaskValue:
    """Per class: morphological closing (square element, given radius), then
    removal of connected components smaller than ``min_component`` pixels.

    Closing only fills background pixels; existing labels are never
    overwritten, and conflicts go to the smaller class id. Applying the
    operation twice is not guaranteed to be a fixpoint.
    """
    if close_radius < 0:
        raise ValueError("close_radius must be >= 0")
    out = mask.classes.copy()
    structure = np.ones((2 * close_radius + 1, 2 * close_radius + 1), dtype=bool)
    for class_id in mask.present_ids():
        binary = mask.classes == class_id
        closed = ndimage.binary_closing(binary, structure=structure) if close_radius > 0 else binary
        out[closed & (out == 0)] = class_id
        final = out == class_id
        labels, count = ndimage.label(final, structure=FOUR_CONN)
        if count:
            sizes = np.bincount(labels.ravel())
            small = np.nonzero(sizes < min_component)[0]
            small = small[small != 0]
            if len(small):
                out[np.isin(labels, small)] = 0
    return MaskValue(out, mask.class_table)
