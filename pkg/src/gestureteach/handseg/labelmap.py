"""Per-pixel body-part label maps and hand-mask extraction.

Backends publish a label->name table rather than fixed numeric ids, so the
adapter always selects parts by name. The default part taxonomy is the
20-class LIP human-parsing label set; note that its arm classes cover arms
and hands *not* covered by clothes or gloves, so gloved hands drop out of
the extracted mask (documented limitation, not compensated here).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import BinaryMask
from ..errors import ConfigError, ShapeError

# LIP human-parsing taxonomy, label id -> normalized name.
LIP_LABEL_NAMES: dict[int, str] = {
    0: "background",
    1: "hat",
    2: "hair",
    3: "glove",
    4: "sunglasses",
    5: "upper-clothes",
    6: "dress",
    7: "coat",
    8: "socks",
    9: "pants",
    10: "jumpsuits",
    11: "scarf",
    12: "skirt",
    13: "face",
    14: "left-arm",
    15: "right-arm",
    16: "left-leg",
    17: "right-leg",
    18: "left-shoe",
    19: "right-shoe",
}

DEFAULT_ARM_LABELS = frozenset({"left-arm", "right-arm"})


@dataclass(frozen=True, eq=False)
class BodyPartLabelMap:
    """Small-integer label per pixel plus the label->name table."""

    labels: np.ndarray
    label_names: dict[int, str]

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ShapeError(f"label map must be (H, W), got {lab.shape}")
        if lab.dtype.kind not in "iu":
            raise ShapeError(f"labels must be integers, got {lab.dtype}")
        present = np.unique(lab)
        missing = [int(v) for v in present if int(v) not in self.label_names]
        if missing:
            raise ConfigError(f"labels {missing} missing from label_names table")
        if self.label_names.get(0) != "background":
            raise ConfigError('label 0 must be named "background"')
        arr = np.ascontiguousarray(lab)
        if arr is lab or arr.base is lab:
            arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


def extract_hand_mask(label_map: BodyPartLabelMap, arm_label_names) -> BinaryMask:
    """Mark a pixel 1 iff its label's name is one of the requested part names."""
    requested = set(arm_label_names)
    if not requested:
        raise ConfigError("arm_label_names must not be empty")
    known = set(label_map.label_names.values())
    unknown = sorted(requested - known)
    if unknown:
        raise ConfigError(
            f"unknown part names {unknown}; valid names: {sorted(known)}"
        )
    wanted_ids = [lid for lid, name in label_map.label_names.items() if name in requested]
    mask = np.isin(label_map.labels, wanted_ids)
    return BinaryMask(mask.astype(np.uint8))
