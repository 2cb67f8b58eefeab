"""Input packing for the gesture-guided segmentor."""

from __future__ import annotations

import numpy as np

from ..core import BinaryMask, ImageFrame, check_same_shape


def prepare_input(frame: ImageFrame, hand: BinaryMask) -> np.ndarray:
    """Stack RGB (scaled to [0,1]) with the hand mask into a (4, H, W) array."""
    check_same_shape(frame, hand, "frame and hand mask")
    rgb = frame.pixels.astype(np.float32) / 255.0
    chans = np.concatenate(
        [rgb.transpose(2, 0, 1), hand.values[None].astype(np.float32)], axis=0
    )
    return chans
