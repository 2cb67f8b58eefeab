"""Pure pixel operations on frames and masks."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .frames import BinaryMask, ImageFrame, SoftMask, check_same_shape

DEFAULT_THRESHOLD = 0.5


def binarize(soft: SoftMask, threshold: float = DEFAULT_THRESHOLD) -> BinaryMask:
    """Threshold a soft mask; a pixel becomes 1 iff its value >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold must lie in [0, 1], got {threshold}")
    return BinaryMask((soft.values >= threshold).astype(np.uint8))


def round_half_up(x: np.ndarray) -> np.ndarray:
    """Round to nearest with .5 going up (numpy's rint rounds to even)."""
    return np.floor(x + 0.5)


def overlay_highlight(
    frame: ImageFrame,
    mask: SoftMask,
    color: tuple[int, int, int] = (255, 0, 0),
    alpha_scale: float = 1.0,
) -> ImageFrame:
    """Blend a translucent color onto a frame, weighted by the mask.

    Each output pixel is (1 - a) * input + a * color with a = alpha_scale *
    mask value, clamped to [0, 255] and rounded half-up.
    """
    check_same_shape(frame, mask, "frame and mask")
    a = (alpha_scale * mask.values.astype(np.float64))[:, :, None]
    col = np.asarray(color, dtype=np.float64).reshape(1, 1, 3)
    out = (1.0 - a) * frame.pixels.astype(np.float64) + a * col
    out = np.clip(round_half_up(out), 0, 255).astype(np.uint8)
    return ImageFrame(out, source_id=frame.source_id)
