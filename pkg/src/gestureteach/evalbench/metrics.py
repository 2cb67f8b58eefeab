"""Segmentation and classification metrics.

Conventions documented where the underlying definitions leave room:
IoU of two empty masks is 1.0 (a correct "nothing here" prediction is not
penalized), and mean IoU is the unweighted per-image mean, not pixel-pooled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import BinaryMask, SoftMask, binarize, check_same_shape
from ..errors import ArgumentError


def iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union of two binary masks; 1.0 if both are empty."""
    check_same_shape(a, b, "masks")
    av = a.values.astype(bool)
    bv = b.values.astype(bool)
    union = int(np.logical_or(av, bv).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(av, bv).sum())
    return inter / union


@dataclass
class EvalReport:
    """Evaluation results for one model on one dataset."""

    miou: float
    per_image_iou: list[float] = field(default_factory=list)
    classification_accuracy: float | None = None
    fps: float | None = None
    model_desc: str = ""
    dataset_desc: str = ""
    seed: int = 0

    def __post_init__(self):
        if self.per_image_iou:
            mean = float(np.mean(self.per_image_iou))
            if abs(mean - self.miou) > 1e-9:
                raise ArgumentError(
                    f"miou {self.miou} does not match mean of per-image IoUs {mean}"
                )
        for v in self.per_image_iou:
            if not 0.0 <= v <= 1.0:
                raise ArgumentError(f"IoU {v} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "miou": self.miou,
            "per_image_iou": list(self.per_image_iou),
            "classification_accuracy": self.classification_accuracy,
            "fps": self.fps,
            "model_desc": self.model_desc,
            "dataset_desc": self.dataset_desc,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            miou=d["miou"],
            per_image_iou=list(d.get("per_image_iou", [])),
            classification_accuracy=d.get("classification_accuracy"),
            fps=d.get("fps"),
            model_desc=d.get("model_desc", ""),
            dataset_desc=d.get("dataset_desc", ""),
            seed=d.get("seed", 0),
        )


def miou(
    pairs: list[tuple[SoftMask, BinaryMask]],
    threshold: float = 0.5,
    model_desc: str = "",
    dataset_desc: str = "",
    seed: int = 0,
) -> EvalReport:
    """Binarize each predicted soft mask and average IoU over images."""
    if not pairs:
        raise ArgumentError("miou requires at least one (prediction, truth) pair")
    per_image = [iou(binarize(pred, threshold), gt) for pred, gt in pairs]
    return EvalReport(
        miou=float(np.mean(per_image)),
        per_image_iou=per_image,
        model_desc=model_desc,
        dataset_desc=dataset_desc,
        seed=seed,
    )


def classification_accuracy(preds: list[int], labels: list[int]) -> float:
    """Fraction of exact matches between predictions and labels."""
    if len(preds) != len(labels):
        raise ArgumentError(f"length mismatch: {len(preds)} preds vs {len(labels)} labels")
    if not preds:
        raise ArgumentError("classification_accuracy requires nonempty inputs")
    hits = sum(1 for p, t in zip(preds, labels) if p == t)
    return hits / len(preds)
