"""Runtime values flowing along edges: text, images, masks, numbers,
booleans, and lists thereof.

Each value knows its DataType, a stable content digest (the engine's cache
and the dataset manifest both key on it), and a wire encoding: PNG for
images and masks, UTF-8 for text, canonical text for numbers and booleans.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from PIL import Image as PilImage

from .canonical import compact_line
from .errors import DimensionMismatch, SchemaError
from .graph.types import BOOLEAN, IMAGE, MASK, NUMBER, TEXT, DataType, list_of

MAX_SIDE = 4096


def _digest(*chunks: bytes) -> str:
    h = hashlib.sha256()
    for c in chunks:
        h.update(len(c).to_bytes(8, "big"))
        h.update(c)
    return h.hexdigest()


class Value:
    """Base class; concrete values are immutable after construction."""

    def dtype(self) -> DataType:
        raise NotImplementedError

    def digest(self) -> str:
        raise NotImplementedError

    def payload(self) -> tuple[bytes, str]:
        """Wire bytes and content type for artifact retrieval."""
        raise NotImplementedError

    def nbytes(self) -> int:
        """Approximate in-memory size, used for cache accounting."""
        raise NotImplementedError


@dataclass(frozen=True)
class TextValue(Value):
    text: str

    def dtype(self) -> DataType:
        return TEXT

    def digest(self) -> str:
        return _digest(b"text", self.text.encode("utf-8"))

    def payload(self) -> tuple[bytes, str]:
        return self.text.encode("utf-8"), "text/plain; charset=utf-8"

    def nbytes(self) -> int:
        return len(self.text.encode("utf-8"))


@dataclass(frozen=True)
class NumberValue(Value):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def dtype(self) -> DataType:
        return NUMBER

    def canonical_text(self) -> str:
        return compact_line(self.value)

    def digest(self) -> str:
        return _digest(b"number", self.canonical_text().encode("ascii"))

    def payload(self) -> tuple[bytes, str]:
        return self.canonical_text().encode("ascii"), "text/plain; charset=utf-8"

    def nbytes(self) -> int:
        return 8


@dataclass(frozen=True)
class BooleanValue(Value):
    value: bool

    def dtype(self) -> DataType:
        return BOOLEAN

    def canonical_text(self) -> str:
        return "true" if self.value else "false"

    def digest(self) -> str:
        return _digest(b"boolean", self.canonical_text().encode("ascii"))

    def payload(self) -> tuple[bytes, str]:
        return self.canonical_text().encode("ascii"), "text/plain; charset=utf-8"

    def nbytes(self) -> int:
        return 1


class ImageValue(Value):
    """RGB raster, 8 bits per channel, row-major (height, width, 3)."""

    def __init__(self, pixels: np.ndarray):
        pixels = np.asarray(pixels, dtype=np.uint8)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise DimensionMismatch(f"image pixels must have shape (h, w, 3), got {pixels.shape}")
        h, w = pixels.shape[:2]
        if not (1 <= w <= MAX_SIDE and 1 <= h <= MAX_SIDE):
            raise DimensionMismatch(f"image dimensions {w}x{h} outside 1..{MAX_SIDE}")
        pixels = pixels.copy()
        pixels.setflags(write=False)
        self.pixels = pixels

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def dtype(self) -> DataType:
        return IMAGE

    def digest(self) -> str:
        head = f"{self.width}x{self.height}".encode("ascii")
        return _digest(b"image", head, self.pixels.tobytes())

    def to_png(self) -> bytes:
        buf = io.BytesIO()
        PilImage.fromarray(self.pixels, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()

    @classmethod
    def from_png(cls, data: bytes) -> "ImageValue":
        with PilImage.open(io.BytesIO(data)) as im:
            return cls(np.asarray(im.convert("RGB")))

    def payload(self) -> tuple[bytes, str]:
        return self.to_png(), "image/png"

    def nbytes(self) -> int:
        return int(self.pixels.nbytes)

    def __eq__(self, other) -> bool:
        return isinstance(other, ImageValue) and np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash(self.digest())


class MaskValue(Value):
    """Per-pixel class ids (uint8, 0 = background) plus the class table."""

    def __init__(self, classes: np.ndarray, class_table: Mapping[int, str]):
        classes = np.asarray(classes, dtype=np.uint8)
        if classes.ndim != 2:
            raise DimensionMismatch(f"mask must have shape (h, w), got {classes.shape}")
        h, w = classes.shape
        if not (1 <= w <= MAX_SIDE and 1 <= h <= MAX_SIDE):
            raise DimensionMismatch(f"mask dimensions {w}x{h} outside 1..{MAX_SIDE}")
        table = {int(k): str(v) for k, v in class_table.items()}
        present = {int(c) for c in np.unique(classes)} - {0}
        missing = present - set(table)
        if missing:
            raise SchemaError(f"mask contains class ids without class_table entries: {sorted(missing)}")
        classes = classes.copy()
        classes.setflags(write=False)
        self.classes = classes
        self.class_table = table

    @property
    def width(self) -> int:
        return self.classes.shape[1]

    @property
    def height(self) -> int:
        return self.classes.shape[0]

    def dtype(self) -> DataType:
        return MASK

    def present_ids(self) -> list[int]:
        return sorted(int(c) for c in np.unique(self.classes) if c != 0)

    def digest(self) -> str:
        head = f"{self.width}x{self.height}".encode("ascii")
        table = compact_line({str(k): v for k, v in self.class_table.items()}).encode("utf-8")
        return _digest(b"mask", head, self.classes.tobytes(), table)

    def to_png(self) -> bytes:
        buf = io.BytesIO()
        PilImage.fromarray(self.classes, mode="L").save(buf, format="PNG")
        return buf.getvalue()

    @classmethod
    def from_png(cls, data: bytes, class_table: Mapping[int, str]) -> "MaskValue":
        with PilImage.open(io.BytesIO(data)) as im:
            return cls(np.asarray(im.convert("L")), class_table)

    def payload(self) -> tuple[bytes, str]:
        return self.to_png(), "image/png"

    def nbytes(self) -> int:
        return int(self.classes.nbytes)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MaskValue)
            and np.array_equal(self.classes, other.classes)
            and self.class_table == other.class_table
        )

    def __hash__(self):
        return hash(self.digest())


class ListValue(Value):
    """Homogeneous list of values; the element type is fixed at construction
    so empty lists still carry a full DataType."""

    def __init__(self, element_type: DataType, items: Iterable[Value]):
        items = tuple(items)
        for item in items:
            if item.dtype() != element_type:
                raise SchemaError(
                    f"list element of type {item.dtype()} does not match declared {element_type}"
                )
        self.element_type = element_type
        self.items = items

    def dtype(self) -> DataType:
        return list_of(self.element_type)

    def digest(self) -> str:
        return _digest(b"list", str(self.element_type).encode("ascii"),
                       *[item.digest().encode("ascii") for item in self.items])

    def payload(self) -> tuple[bytes, str]:
        entries = [item.digest() for item in self.items]
        body = compact_line({"element_type": str(self.element_type), "item_digests": entries})
        return body.encode("utf-8"), "application/json"

    def nbytes(self) -> int:
        return sum(item.nbytes() for item in self.items)

    def __len__(self) -> int:
        return len(self.items)


def value_from_literal(dtype: DataType, literal) -> Value:
    """Decode a JSON literal (wire or CLI form) into a Value of ``dtype``."""
    import base64

    if dtype == TEXT:
        if not isinstance(literal, str):
            raise SchemaError(f"text input requires a string literal, got {literal!r}")
        return TextValue(literal)
    if dtype == NUMBER:
        if isinstance(literal, bool) or not isinstance(literal, (int, float)):
            raise SchemaError(f"number input requires a numeric literal, got {literal!r}")
        return NumberValue(float(literal))
    if dtype == BOOLEAN:
        if not isinstance(literal, bool):
            raise SchemaError(f"boolean input requires true/false, got {literal!r}")
        return BooleanValue(literal)
    if dtype == IMAGE:
        if isinstance(literal, dict) and "png_base64" in literal:
            return ImageValue.from_png(base64.b64decode(literal["png_base64"]))
        raise SchemaError('image input requires {"png_base64": ...}')
    if dtype == MASK:
        if isinstance(literal, dict) and "png_base64" in literal:
            table = {int(k): v for k, v in literal.get("class_table", {}).items()}
            return MaskValue.from_png(base64.b64decode(literal["png_base64"]), table)
        raise SchemaError('mask input requires {"png_base64": ..., "class_table": {...}}')
    raise SchemaError(f"no literal encoding for values of type {dtype}")


def literal_from_value(value: Value):
    """Inverse of value_from_literal, used to persist queued-job inputs."""
    import base64

    if isinstance(value, TextValue):
        return value.text
    if isinstance(value, NumberValue):
        return json.loads(value.canonical_text())
    if isinstance(value, BooleanValue):
        return value.value
    if isinstance(value, ImageValue):
        return {"png_base64": base64.b64encode(value.to_png()).decode("ascii")}
    if isinstance(value, MaskValue):
        return {
            "png_base64": base64.b64encode(value.to_png()).decode("ascii"),
            "class_table": {str(k): v for k, v in value.class_table.items()},
        }
    raise SchemaError(f"no literal encoding for values of type {value.dtype()}")
