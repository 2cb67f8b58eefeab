"""Class activation maps from a global-pooled linear classification head.

The raw map is the classifier-weight-weighted sum of the final encoder
feature maps, min-max normalized to [0, 1] per frame (a constant raw map
normalizes to all-zero) and bilinearly upsampled to frame size.
"""

from __future__ import annotations

import numpy as np

from ..core import SoftMask

NORM_EPS = 1e-12


def normalize_minmax(raw: np.ndarray) -> np.ndarray:
    lo = float(raw.min())
    hi = float(raw.max())
    if hi - lo < NORM_EPS:
        return np.zeros_like(raw, dtype=np.float64)
    return (raw.astype(np.float64) - lo) / (hi - lo)


def cam_from_features(features: np.ndarray, class_weights: np.ndarray) -> np.ndarray:
    """Weighted feature sum + min-max normalization at feature resolution."""
    raw = np.tensordot(class_weights.astype(np.float64), features.astype(np.float64), axes=1)
    return normalize_minmax(raw)


def upsample_to(raw01: np.ndarray, size_hw: tuple[int, int]) -> SoftMask:
    import torch
    import torch.nn.functional as F

    t = torch.from_numpy(raw01.astype(np.float32))[None, None]
    up = F.interpolate(t, size=size_hw, mode="bilinear", align_corners=False)
    return SoftMask(np.clip(up[0, 0].numpy(), 0.0, 1.0))
