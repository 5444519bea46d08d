"""Mean intersection-over-union between predicted and ground-truth masks."""

from __future__ import annotations

from dataclasses import dataclass

from ..canonical import compact_line
from ..errors import DimensionMismatch
from ..values import MaskValue


@dataclass(frozen=True)
class MiouReport:
    """Per-class IoU (None where both masks lack the class entirely) and the
    arithmetic mean over the defined classes (None if none are defined)."""

    per_class: dict[int, float | None]
    mean: float | None

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "per_class": {str(k): v for k, v in sorted(self.per_class.items())},
        }

    def canonical_text(self) -> str:
        return compact_line(self.to_json())


def compute_miou(pred: MaskValue, truth: MaskValue) -> MiouReport:
    """IoU per class over the union of nonzero ids present in either mask.

    Background (0) is excluded. Class-table entries with no pixels anywhere
    are reported as undefined and excluded from the mean; if no class has
    pixels at all, the mean itself is undefined.
    """
    if (pred.width, pred.height) != (truth.width, truth.height):
        raise DimensionMismatch(
            f"pred {pred.width}x{pred.height} vs truth {truth.width}x{truth.height}"
        )
    pixel_ids = sorted(set(pred.present_ids()) | set(truth.present_ids()))
    table_ids = (set(pred.class_table) | set(truth.class_table)) - {0}
    per_class: dict[int, float | None] = {cid: None for cid in sorted(table_ids)}

    p = pred.classes
    t = truth.classes
    for cid in pixel_ids:
        inter = int(((p == cid) & (t == cid)).sum())
        union = int(((p == cid) | (t == cid)).sum())
        per_class[cid] = inter / union

    defined = [v for v in per_class.values() if v is not None]
    mean = sum(defined) / len(defined) if defined else None
    return MiouReport(per_class=per_class, mean=mean)
