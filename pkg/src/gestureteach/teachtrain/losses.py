"""Joint classification + segmentation loss.

l_joint = l_cls + lambda * l_seg, with l_cls the softmax cross-entropy over
class logits and l_seg the mean per-pixel sigmoid binary cross-entropy.
The mean (not sum) reduction keeps both terms on comparable scales across
resolutions, so lambda = 1 weighs them equally.

The numpy path is the reference: 64-bit, numerically stable, with closed
form analytic gradients. The torch criterion is the training-time
equivalent and is tested against the reference.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, log_softmax, softmax

from ..core import BinaryMask
from ..errors import ArgumentError, ShapeError


def _as_mask_array(gt_mask) -> np.ndarray:
    if isinstance(gt_mask, BinaryMask):
        return gt_mask.values.astype(np.float64)
    return np.asarray(gt_mask, dtype=np.float64)


def _check_seg(seg_logits, gt) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(seg_logits, dtype=np.float64)
    m = _as_mask_array(gt)
    if s.shape != m.shape:
        raise ShapeError(f"seg logits shape {s.shape} != mask shape {m.shape}")
    return s, m


def seg_bce(seg_logits, gt_mask) -> float:
    """Mean per-pixel binary cross-entropy on logits (stable form)."""
    s, m = _check_seg(seg_logits, gt_mask)
    # -[m log sigmoid(s) + (1-m) log(1-sigmoid(s))] = log(1+e^s) - m*s
    per_pixel = np.logaddexp(0.0, s) - m * s
    return float(per_pixel.mean())


def cls_cross_entropy(cls_logits, true_class: int) -> float:
    z = np.asarray(cls_logits, dtype=np.float64)
    if z.ndim != 1 or z.size < 2:
        raise ArgumentError(f"class logits must be a vector of >= 2, got shape {z.shape}")
    if not 0 <= true_class < z.size:
        raise ArgumentError(f"true_class {true_class} outside [0, {z.size})")
    return float(-log_softmax(z)[true_class])


def joint_loss(
    cls_logits,
    true_class: int,
    seg_logits=None,
    gt_mask=None,
    lam: float = 1.0,
) -> float:
    """l_cls + lam * l_seg; lam = 0 or an absent seg head yields l_cls exactly."""
    loss = cls_cross_entropy(cls_logits, true_class)
    if lam != 0.0 and seg_logits is not None:
        if gt_mask is None:
            raise ArgumentError("seg_logits given without gt_mask")
        loss += lam * seg_bce(seg_logits, gt_mask)
    return loss


def joint_loss_grad(
    cls_logits,
    true_class: int,
    seg_logits=None,
    gt_mask=None,
    lam: float = 1.0,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Analytic gradients of joint_loss w.r.t. class and segmentation logits."""
    z = np.asarray(cls_logits, dtype=np.float64)
    if not 0 <= true_class < z.size:
        raise ArgumentError(f"true_class {true_class} outside [0, {z.size})")
    d_cls = softmax(z)
    d_cls[true_class] -= 1.0
    d_seg = None
    if lam != 0.0 and seg_logits is not None:
        s, m = _check_seg(seg_logits, gt_mask)
        d_seg = lam * (expit(s) - m) / s.size
    return d_cls, d_seg


class JointCriterion:
    """Torch-side joint loss used by the training loop."""

    def __init__(self, lam: float = 1.0):
        if lam < 0:
            raise ArgumentError(f"lambda must be >= 0, got {lam}")
        self.lam = lam

    def __call__(self, cls_logits, targets, seg_logits=None, seg_targets=None):
        import torch.nn.functional as F

        loss = F.cross_entropy(cls_logits, targets)
        if self.lam != 0.0 and seg_logits is not None:
            loss = loss + self.lam * F.binary_cross_entropy_with_logits(
                seg_logits, seg_targets
            )
        return loss
