"""Deterministic resizing helpers.

Frames resize bilinearly; masks resize with nearest-neighbor so label
values stay discrete.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .frames import BinaryMask, ImageFrame, SoftMask


def resize_frame(frame: ImageFrame, size_hw: tuple[int, int]) -> ImageFrame:
    h, w = size_hw
    if frame.shape == (h, w):
        return frame
    img = Image.fromarray(frame.pixels, mode="RGB").resize((w, h), Image.BILINEAR)
    return ImageFrame(np.asarray(img), source_id=frame.source_id)


def resize_mask_nearest(mask: BinaryMask, size_hw: tuple[int, int]) -> BinaryMask:
    h, w = size_hw
    if mask.shape == (h, w):
        return mask
    img = Image.fromarray(mask.values, mode="L").resize((w, h), Image.NEAREST)
    return BinaryMask(np.asarray(img))


def resize_soft_bilinear(soft: SoftMask, size_hw: tuple[int, int]) -> SoftMask:
    h, w = size_hw
    if soft.shape == (h, w):
        return soft
    img = Image.fromarray(soft.values.astype(np.float32), mode="F").resize(
        (w, h), Image.BILINEAR
    )
    arr = np.clip(np.asarray(img), 0.0, 1.0)
    return SoftMask(arr)
