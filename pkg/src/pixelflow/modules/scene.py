"""Structured prompts and procedural scene synthesis.

A SceneSpec is the canonical text handed from the prompting stage to the
generator: which classes, how many instances, a style tag, and the canvas
size. The generator places non-overlapping solid shapes (one color-jittered
instance at a time) over textured noise and emits the image together with
its exact ground-truth mask.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..canonical import compact_line
from ..errors import PlacementOverflow, SchemaError, UnknownClass
from ..seeds import MASK64
from ..values import ImageValue, MaskValue, TextValue
from .palette import DEFAULT_PALETTE, Palette, ShapeFamily

COLOR_JITTER = 15          # per-channel instance color jitter
NOISE_LO, NOISE_HI = 108, 148   # background channel range, >=116 from every base color
MIN_COVER_FRACTION = 0.005  # every instance (hence class) covers >=0.5% of the canvas
PLACE_RETRIES = 40
SHRINK_FACTOR = 0.8
SHRINK_ROUNDS = 6
INSTANCE_GAP = 2           # background pixels kept between instances


@dataclass(frozen=True)
class SceneSpec:
    """Parsed prompt: ordered (class, count) pairs, style, canvas size."""

    classes: tuple[tuple[str, int], ...]
    style: str
    width: int
    height: int

    def to_text(self) -> str:
        obj = {
            "canvas": [self.width, self.height],
            "classes": [{"count": c, "name": n} for n, c in self.classes],
            "style": self.style,
        }
        return compact_line(obj)

    @classmethod
    def from_text(cls, text: str) -> "SceneSpec":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"scene spec is not valid JSON: {exc.msg}") from exc
        try:
            classes = tuple((c["name"], int(c["count"])) for c in obj["classes"])
            width, height = (int(v) for v in obj["canvas"])
            return cls(classes=classes, style=str(obj["style"]), width=width, height=height)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"scene spec missing or malformed field: {exc}") from exc

    def validate(self, palette: Palette) -> None:
        if not self.classes:
            raise SchemaError("scene spec requires at least one class")
        for name, count in self.classes:
            if name not in palette:
                raise UnknownClass(f"class {name!r} is not in the palette")
            if count < 1:
                raise SchemaError(f"class {name!r}: instance count must be >= 1")
        if not (1 <= self.width <= 4096 and 1 <= self.height <= 4096):
            raise SchemaError(f"canvas {self.width}x{self.height} outside 1..4096")


def prompt_build(
    classes: list[tuple[str, int]],
    style: str = "noise",
    canvas: tuple[int, int] = (160, 120),
    palette: Palette = DEFAULT_PALETTE,
) -> TextValue:
    """Build the canonical scene prompt; round-trips via SceneSpec.from_text."""
    spec = SceneSpec(classes=tuple((str(n), int(c)) for n, c in classes),
                     style=style, width=int(canvas[0]), height=int(canvas[1]))
    spec.validate(palette)
    return TextValue(spec.to_text())


@dataclass(frozen=True)
class Placement:
    """Provenance of one placed instance (geometry in pixel coordinates)."""

    class_name: str
    class_id: int
    color: tuple[int, int, int]
    shape: ShapeFamily
    # circle: (cy, cx, r); rectangle: (y0, x0, h, w); triangle: 3 vertices (y, x)
    geometry: tuple
    pixel_count: int


@dataclass(frozen=True)
class SceneResult:
    image: ImageValue
    mask: MaskValue
    placements: tuple[Placement, ...]
    dropped_class: str | None


def _raster_circle(r: float) -> np.ndarray:
    rad = int(np.ceil(r))
    side = 2 * rad + 1
    yy, xx = np.mgrid[0:side, 0:side]
    return (yy - rad) ** 2 + (xx - rad) ** 2 <= r * r


def _raster_triangle(tw: float, th: float) -> np.ndarray:
    w = max(int(np.ceil(tw)), 3)
    h = max(int(np.ceil(th)), 3)
    yy, xx = np.mgrid[0:h, 0:w]
    apex = (0.0, (w - 1) / 2.0)
    left = (float(h - 1), 0.0)
    right = (float(h - 1), float(w - 1))

    def half_plane(p, q):
        return (q[1] - p[1]) * (yy - p[0]) - (q[0] - p[0]) * (xx - p[1])

    d1 = half_plane(apex, left)
    d2 = half_plane(left, right)
    d3 = half_plane(right, apex)
    inside = ((d1 >= 0) & (d2 >= 0) & (d3 >= 0)) | ((d1 <= 0) & (d2 <= 0) & (d3 <= 0))
    return inside


def _background(rng: np.random.Generator, width: int, height: int, style: str) -> np.ndarray:
    """Textured noise background; every channel stays in [NOISE_LO, NOISE_HI]."""
    variants = ("noise", "blotch", "stripes")
    chosen = style if style in variants else variants[sum(style.encode("utf-8")) % len(variants)]
    if chosen == "noise":
        return rng.integers(NOISE_LO, NOISE_HI + 1, size=(height, width, 3), dtype=np.int64).astype(np.uint8)
    if chosen == "blotch":
        cell = 8
        hh = (height + cell - 1) // cell
        ww = (width + cell - 1) // cell
        coarse = rng.integers(NOISE_LO, NOISE_HI + 1, size=(hh, ww, 3), dtype=np.int64)
        return np.kron(coarse, np.ones((cell, cell, 1), dtype=np.int64))[:height, :width].astype(np.uint8)
    # stripes: horizontal bands plus fine noise, clipped to the safe range
    rows = np.arange(height)
    band = ((np.sin(rows / 6.0) + 1.0) / 2.0 * (NOISE_HI - NOISE_LO - 8) + NOISE_LO + 4).astype(np.int64)
    base = np.repeat(band[:, None, None], width, axis=1)
    fine = rng.integers(-4, 5, size=(height, width, 3), dtype=np.int64)
    return np.clip(base + fine, NOISE_LO, NOISE_HI).astype(np.uint8)


def _shape_stamp(shape: ShapeFamily, area: float, rng: np.random.Generator):
    """Rasterize one instance at roughly the target pixel area.

    Returns (boolean stamp, geometry builder) where the builder converts a
    top-left placement offset into absolute geometry for provenance.
    """
    if shape is ShapeFamily.CIRCLE:
        r = max(np.sqrt(area / np.pi), 2.0)
        stamp = _raster_circle(r)
        rad = (stamp.shape[0] - 1) // 2

        def geom(y, x):
            return (y + rad, x + rad, r)
    elif shape is ShapeFamily.RECTANGLE:
        aspect = 1.2 + rng.random() * 1.3
        if rng.random() < 0.5:
            aspect = 1.0 / aspect
        w = max(int(round(np.sqrt(area * aspect))), 3)
        h = max(int(round(area / w)), 3)
        stamp = np.ones((h, w), dtype=bool)

        def geom(y, x):
            return (y, x, h, w)
    else:
        tw = max(np.sqrt(area * 2.2), 4.0)
        th = tw * 0.9
        stamp = _raster_triangle(tw, th)
        hh, ww = stamp.shape

        def geom(y, x):
            return ((y, x + (ww - 1) / 2.0), (y + hh - 1, x), (y + hh - 1, x + ww - 1))
    return stamp, geom


def synthesize_scene(
    spec: SceneSpec,
    seed: int,
    class_dropout_rate: float = 0.0,
    palette: Palette = DEFAULT_PALETTE,
) -> SceneResult:
    """Deterministically render a scene and its ground-truth mask.

    With a nonzero dropout rate, one randomly chosen requested class may be
    omitted from the render (an injected generation failure for filter
    testing); the class keeps its class_table entry but covers no pixels.
    """
    spec.validate(palette)
    rng = np.random.default_rng(seed & MASK64)
    width, height = spec.width, spec.height
    canvas_px = width * height
    floor = max(int(np.ceil(canvas_px * MIN_COVER_FRACTION)), 9)

    dropped: str | None = None
    if class_dropout_rate > 0:
        u = rng.random()
        idx = int(rng.integers(0, len(spec.classes)))
        if u < class_dropout_rate:
            dropped = spec.classes[idx][0]

    image = _background(rng, width, height, spec.style)
    mask = np.zeros((height, width), dtype=np.uint8)
    occupied = np.zeros((height, width), dtype=bool)
    placements: list[Placement] = []

    for name, count in spec.classes:
        entry = palette.get(name)
        if name == dropped:
            continue
        for _ in range(count):
            color = tuple(int(c) + int(j) for c, j in
                          zip(entry.base_color, rng.integers(-COLOR_JITTER, COLOR_JITTER + 1, 3)))
            area = canvas_px * (MIN_COVER_FRACTION + rng.random() * 0.015)
            placed = False
            for _round in range(SHRINK_ROUNDS):
                stamp, geom = _shape_stamp(entry.shape, area, rng)
                # grow until the rasterized pixel count clears the coverage floor
                grow = 1.0
                while stamp.sum() < floor:
                    grow *= 1.1
                    stamp, geom = _shape_stamp(entry.shape, area * grow, rng)
                sh, sw = stamp.shape
                if sh <= height and sw <= width:
                    for _try in range(PLACE_RETRIES):
                        y = int(rng.integers(0, height - sh + 1))
                        x = int(rng.integers(0, width - sw + 1))
                        pad = INSTANCE_GAP
                        window = occupied[max(0, y - pad):y + sh + pad, max(0, x - pad):x + sw + pad]
                        if window.any():
                            continue
                        image[y:y + sh, x:x + sw][stamp] = color
                        mask[y:y + sh, x:x + sw][stamp] = entry.class_id
                        occupied[y:y + sh, x:x + sw][stamp] = True
                        placements.append(Placement(
                            class_name=name, class_id=entry.class_id, color=color,
                            shape=entry.shape, geometry=geom(y, x), pixel_count=int(stamp.sum()),
                        ))
                        placed = True
                        break
                if placed:
                    break
                shrunk = area * SHRINK_FACTOR
                if shrunk < floor:
                    break
                area = shrunk
            if not placed:
                raise PlacementOverflow(
                    f"cannot place {count} instance(s) of {name!r} on a "
                    f"{width}x{height} canvas without overlap"
                )

    table = palette.class_table([n for n, _ in spec.classes])
    return SceneResult(
        image=ImageValue(image),
        mask=MaskValue(mask, table),
        placements=tuple(placements),
        dropped_class=dropped,
    )


def scene_synthesize(spec_text: str, seed: int, class_dropout_rate: float = 0.0,
                     palette: Palette = DEFAULT_PALETTE) -> tuple[ImageValue, MaskValue]:
    """Module-facing wrapper: prompt text in, (image, ground-truth mask) out."""
    result = synthesize_scene(SceneSpec.from_text(spec_text), seed,
                              class_dropout_rate=class_dropout_rate, palette=palette)
    return result.image, result.mask
