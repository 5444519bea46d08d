"""Color-statistics presence check used to filter bad generations."""

from __future__ import annotations

import numpy as np

from ..canonical import compact_line
from ..values import BooleanValue, ImageValue, TextValue
from .palette import DEFAULT_PALETTE, Palette

DEFAULT_MIN_FRACTION = 0.002
DEFAULT_TOLERANCE = 60.0


def class_fraction(image: ImageValue, base_color, tolerance: float) -> float:
    """Fraction of pixels within ``tolerance`` RGB distance of ``base_color``."""
    px = image.pixels.astype(np.int64)
    ref = np.asarray(base_color, dtype=np.int64)
    d2 = ((px - ref) ** 2).sum(axis=2)
    hits = int((d2 <= tolerance * tolerance).sum())
    return hits / (image.width * image.height)


def presence_verify(
    image: ImageValue,
    expected: list[str],
    min_fraction: float = DEFAULT_MIN_FRACTION,
    tolerance: float = DEFAULT_TOLERANCE,
    palette: Palette = DEFAULT_PALETTE,
) -> tuple[BooleanValue, TextValue]:
    """True iff every expected class covers at least ``min_fraction`` of the
    image within color tolerance; the report lists per-class fractions."""
    if not expected:
        raise ValueError("expected class list must be non-empty")
    entries = [palette.get(name) for name in expected]  # raises UnknownClass
    fractions = {e.name: class_fraction(image, e.base_color, tolerance) for e in entries}
    ok = all(f >= min_fraction for f in fractions.values())
    report = compact_line({
        "fractions": fractions,
        "min_fraction": min_fraction,
        "ok": ok,
        "tolerance": tolerance,
    })
    return BooleanValue(ok), TextValue(report)
