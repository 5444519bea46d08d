"""Dataset output: numbered image/mask PNG pairs plus a canonical manifest."""

from __future__ import annotations

import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..canonical import canonical_bytes
from ..errors import DimensionMismatch, DuplicateOutputDir, IoError
from ..values import ImageValue, MaskValue


@dataclass(frozen=True)
class DatasetManifest:
    count: int
    class_table: dict[int, str]
    pipeline_digest: str
    samples: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "class_table": {str(k): v for k, v in sorted(self.class_table.items())},
            "pipeline_digest": self.pipeline_digest,
            "samples": self.samples,
        }


def dataset_write(
    samples: Sequence[tuple[ImageValue, MaskValue]],
    out_dir: str | Path,
    class_table: dict[int, str],
    pipeline_digest: str = "",
    overwrite: bool = False,
) -> DatasetManifest:
    """Write ``images/%06d.png`` (RGB) and ``masks/%06d.png`` (8-bit class
    ids) in insertion order, then ``manifest.json`` with per-sample content
    digests. Refuses a non-empty target unless ``overwrite`` is set."""
    out = Path(out_dir)
    for i, (image, mask) in enumerate(samples):
        if (image.width, image.height) != (mask.width, mask.height):
            raise DimensionMismatch(
                f"sample {i}: image {image.width}x{image.height} vs mask {mask.width}x{mask.height}"
            )
    try:
        if out.exists() and any(out.iterdir()):
            if not overwrite:
                raise DuplicateOutputDir(f"output directory {out} is not empty")
            for name in ("images", "masks"):
                shutil.rmtree(out / name, ignore_errors=True)
            (out / "manifest.json").unlink(missing_ok=True)
            (out / "summary.json").unlink(missing_ok=True)
        (out / "images").mkdir(parents=True, exist_ok=True)
        (out / "masks").mkdir(parents=True, exist_ok=True)

        entries = []
        for i, (image, mask) in enumerate(samples):
            image_rel = f"images/{i:06d}.png"
            mask_rel = f"masks/{i:06d}.png"
            (out / image_rel).write_bytes(image.to_png())
            (out / mask_rel).write_bytes(mask.to_png())
            entries.append({
                "index": i,
                "image": {"digest": image.digest(), "file": image_rel},
                "mask": {"digest": mask.digest(), "file": mask_rel},
            })
        manifest = DatasetManifest(
            count=len(entries),
            class_table=dict(class_table),
            pipeline_digest=pipeline_digest,
            samples=entries,
        )
        (out / "manifest.json").write_bytes(canonical_bytes(manifest.to_json()))
    except OSError as exc:
        raise IoError(f"dataset write failed: {exc}") from exc
    return manifest
