from .backends import BACKENDS, HandSegmentor, HandSegmentorConfig, parse_human
from .labelmap import (
    DEFAULT_ARM_LABELS,
    LIP_LABEL_NAMES,
    BodyPartLabelMap,
    extract_hand_mask,
)

__all__ = [
    "BACKENDS",
    "DEFAULT_ARM_LABELS",
    "LIP_LABEL_NAMES",
    "BodyPartLabelMap",
    "HandSegmentor",
    "HandSegmentorConfig",
    "extract_hand_mask",
    "parse_human",
]
