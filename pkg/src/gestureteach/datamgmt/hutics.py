"""Loading and validation of gesture-dataset corpora.

Canonical on-disk layout::

    root/
      metadata.json            # list of {image, mask, participant, gesture}
      images/<pid>/<gesture>_<k>.jpg
      masks/<pid>/<gesture>_<k>.png

The `mask` entry is either a PNG path or {"polygons": [[[x, y], ...], ...]}
as produced by polygon annotation tools. Records that fail validation are
skipped and itemized in the load result; loading fails only when no valid
record remains.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image

from ..core import BinaryMask, ImageFrame, PolygonAnnotation
from ..core.pngio import load_mask_png
from ..core.raster import rasterize_polygons
from ..errors import DatasetError, RecordValidationError

log = logging.getLogger(__name__)

GESTURES = ("exhibiting", "pointing", "presenting", "touching")


@dataclass(frozen=True)
class HuTicsRecord:
    image_path: Path
    participant_id: str
    gesture: str
    mask_path: Path | None = None
    polygons: PolygonAnnotation | None = None
    source_id: str = ""

    def load_frame(self) -> ImageFrame:
        import numpy as np

        img = Image.open(self.image_path).convert("RGB")
        return ImageFrame(np.asarray(img), source_id=self.source_id)

    def load_object_mask(self) -> BinaryMask:
        if self.mask_path is not None:
            return load_mask_png(self.mask_path)
        if self.polygons is not None:
            with Image.open(self.image_path) as img:
                w, h = img.size
            return rasterize_polygons(self.polygons, w, h, source=str(self.image_path))
        raise RecordValidationError(f"record {self.source_id!r} has no object mask")


@dataclass
class HuTicsLoadResult:
    records: list[HuTicsRecord] = field(default_factory=list)
    participant_counts: dict[str, int] = field(default_factory=dict)
    gesture_counts: dict[str, int] = field(default_factory=dict)
    issues: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


def _validate_entry(root: Path, i: int, entry: dict) -> HuTicsRecord:
    for key in ("image", "mask", "participant", "gesture"):
        if key not in entry:
            raise RecordValidationError(f"metadata[{i}] missing key {key!r}")
    gesture = entry["gesture"]
    if gesture not in GESTURES:
        raise RecordValidationError(
            f"metadata[{i}] ({entry['image']}): unknown gesture {gesture!r}"
        )
    image_path = root / entry["image"]
    if not image_path.exists():
        raise RecordValidationError(f"metadata[{i}]: image missing: {image_path}")
    try:
        with Image.open(image_path) as img:
            img.verify()
        with Image.open(image_path) as img:
            size = img.size
    except Exception as exc:
        raise RecordValidationError(f"metadata[{i}]: undecodable image {image_path}: {exc}")

    source_id = f"{entry['participant']}_{image_path.stem}"
    mask = entry["mask"]
    if isinstance(mask, dict):
        rings = tuple(tuple((x, y) for x, y in ring) for ring in mask.get("polygons", []))
        poly = PolygonAnnotation(rings)
        try:
            poly.validate(size[0], size[1], source=str(image_path))
        except Exception as exc:
            raise RecordValidationError(f"metadata[{i}]: {exc}")
        return HuTicsRecord(
            image_path=image_path,
            participant_id=str(entry["participant"]),
            gesture=gesture,
            polygons=poly,
            source_id=source_id,
        )

    mask_path = root / mask
    if not mask_path.exists():
        raise RecordValidationError(f"metadata[{i}]: mask missing: {mask_path}")
    try:
        with Image.open(mask_path) as img:
            mask_size = img.size
    except Exception as exc:
        raise RecordValidationError(f"metadata[{i}]: undecodable mask {mask_path}: {exc}")
    if mask_size != size:
        raise RecordValidationError(
            f"metadata[{i}]: mask size {mask_size} != image size {size} for {image_path}"
        )
    return HuTicsRecord(
        image_path=image_path,
        participant_id=str(entry["participant"]),
        gesture=gesture,
        mask_path=mask_path,
        source_id=source_id,
    )


def load_hutics(root: str | Path) -> HuTicsLoadResult:
    """Load and validate a corpus; idempotent and order-stable."""
    root = Path(root)
    meta_path = root / "metadata.json"
    if not meta_path.exists():
        raise DatasetError(f"no records: {meta_path} not found")
    try:
        entries = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"metadata.json is not valid JSON: {exc}")
    if not isinstance(entries, list):
        raise DatasetError("metadata.json must be a list of records")

    result = HuTicsLoadResult()
    for i, entry in enumerate(entries):
        try:
            record = _validate_entry(root, i, entry)
        except RecordValidationError as exc:
            result.issues.append(str(exc))
            continue
        result.records.append(record)

    if not result.records:
        raise DatasetError(
            "no records: every metadata entry failed validation: "
            + "; ".join(result.issues[:5])
        )

    result.records.sort(key=lambda r: (r.participant_id, str(r.image_path)))
    for rec in result.records:
        result.participant_counts[rec.participant_id] = (
            result.participant_counts.get(rec.participant_id, 0) + 1
        )
        result.gesture_counts[rec.gesture] = result.gesture_counts.get(rec.gesture, 0) + 1
    if result.issues:
        log.warning("skipped %d invalid records", len(result.issues))
    return result
