"""PNG / JPEG serialization for frames and masks.

Binary masks serialize to single-channel PNG with values {0, 255}; soft masks
to single-channel 8-bit PNG via round(value * 255). Frames serialize to PNG
(lossless, used for session storage) or JPEG (lossy, used on the wire).
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .frames import BinaryMask, ImageFrame, SoftMask
from .ops import round_half_up


def mask_to_png_bytes(mask: BinaryMask) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(mask.values * np.uint8(255), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def mask_from_png_bytes(data: bytes) -> BinaryMask:
    img = Image.open(io.BytesIO(data)).convert("L")
    arr = np.asarray(img)
    return BinaryMask((arr >= 128).astype(np.uint8))


def soft_to_png_bytes(soft: SoftMask) -> bytes:
    quant = round_half_up(soft.values.astype(np.float64) * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(quant, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def soft_from_png_bytes(data: bytes) -> SoftMask:
    img = Image.open(io.BytesIO(data)).convert("L")
    arr = np.asarray(img).astype(np.float32) / 255.0
    return SoftMask(arr)


def frame_to_png_bytes(frame: ImageFrame) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(frame.pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def frame_from_png_bytes(data: bytes, source_id: str = "") -> ImageFrame:
    img = Image.open(io.BytesIO(data)).convert("RGB")
    return ImageFrame(np.asarray(img), source_id=source_id)


def frame_to_jpeg_bytes(frame: ImageFrame, quality: int = 80) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(frame.pixels, mode="RGB").save(buf, format="JPEG", quality=quality)
    return buf.getvalue()


def frame_from_jpeg_bytes(data: bytes, source_id: str = "") -> ImageFrame:
    img = Image.open(io.BytesIO(data)).convert("RGB")
    return ImageFrame(np.asarray(img), source_id=source_id)


def save_mask_png(mask: BinaryMask, path: str | Path) -> None:
    Path(path).write_bytes(mask_to_png_bytes(mask))


def load_mask_png(path: str | Path) -> BinaryMask:
    return mask_from_png_bytes(Path(path).read_bytes())


def save_soft_png(soft: SoftMask, path: str | Path) -> None:
    Path(path).write_bytes(soft_to_png_bytes(soft))


def load_soft_png(path: str | Path) -> SoftMask:
    return soft_from_png_bytes(Path(path).read_bytes())
