"""Class palette: the shared ground truth between synthesis, verification,
and segmentation.

Base colors are pairwise separated by at least 120 in Euclidean RGB so a
pixel can never sit within matching tolerance of two classes at once, and
background texture stays far enough from every base color that the
threshold segmenter and the presence checker are both well posed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from ..errors import InvalidSpec, UnknownClass

MIN_BASE_SEPARATION = 120.0


class ShapeFamily(str, Enum):
    CIRCLE = "circle"
    RECTANGLE = "rectangle"
    TRIANGLE = "triangle"


@dataclass(frozen=True)
class PaletteEntry:
    name: str
    class_id: int
    base_color: tuple[int, int, int]
    shape: ShapeFamily


def rgb_distance(a, b) -> float:
    return math.sqrt(sum((int(x) - int(y)) ** 2 for x, y in zip(a, b)))


class Palette:
    """Ordered class registry; class ids are 1-based positions."""

    def __init__(self, entries: list[tuple[str, tuple[int, int, int], ShapeFamily]]):
        if not entries:
            raise InvalidSpec("palette requires at least one class")
        self.entries: dict[str, PaletteEntry] = {}
        for idx, (name, color, shape) in enumerate(entries):
            if name in self.entries:
                raise InvalidSpec(f"palette class {name!r} declared twice")
            self.entries[name] = PaletteEntry(name, idx + 1, tuple(int(c) for c in color), shape)
        names = list(self.entries)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                d = rgb_distance(self.entries[a].base_color, self.entries[b].base_color)
                if d < MIN_BASE_SEPARATION:
                    raise InvalidSpec(
                        f"palette colors for {a!r} and {b!r} are {d:.1f} apart; "
                        f"minimum separation is {MIN_BASE_SEPARATION}"
                    )

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def get(self, name: str) -> PaletteEntry:
        entry = self.entries.get(name)
        if entry is None:
            raise UnknownClass(f"class {name!r} is not in the palette")
        return entry

    def by_id(self, class_id: int) -> PaletteEntry:
        for entry in self.entries.values():
            if entry.class_id == class_id:
                return entry
        raise UnknownClass(f"no palette class with id {class_id}")

    def names(self) -> list[str]:
        return list(self.entries)

    def class_table(self, names=None) -> dict[int, str]:
        selected = self.names() if names is None else list(names)
        return {self.get(n).class_id: n for n in selected}

    def base_colors(self) -> dict[int, tuple[int, int, int]]:
        return {e.class_id: e.base_color for e in self.entries.values()}


# Shipped palette. Colors sit 25 units inside the RGB cube so instance
# jitter (+-15 per channel) never clips, separation >= 175 for all pairs.
DEFAULT_PALETTE = Palette([
    ("car", (215, 40, 40), ShapeFamily.RECTANGLE),
    ("bicycle", (40, 40, 215), ShapeFamily.CIRCLE),
    ("motorbike", (215, 215, 40), ShapeFamily.TRIANGLE),
    ("truck", (40, 215, 40), ShapeFamily.RECTANGLE),
    ("person", (215, 40, 215), ShapeFamily.TRIANGLE),
    ("dog", (40, 215, 215), ShapeFamily.CIRCLE),
])
