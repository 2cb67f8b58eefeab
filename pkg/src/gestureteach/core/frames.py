"""Pixel-grid value types: camera frames, binary masks, soft masks, polygons.

All types are immutable after construction (their numpy buffers are marked
read-only), so they can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MalformedAnnotationError, ShapeError

# Canonical capture size of the live pipeline (height, width).
CANONICAL_HEIGHT = 480
CANONICAL_WIDTH = 640


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr or out.base is arr:
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ImageFrame:
    """An RGB image, 8 bits per channel, row-major (height, width, 3)."""

    pixels: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ShapeError(f"frame pixels must be (H, W, 3), got {px.shape}")
        if px.shape[0] <= 0 or px.shape[1] <= 0:
            raise ShapeError("frame must have positive width and height")
        if px.dtype != np.uint8:
            raise ShapeError(f"frame pixels must be uint8, got {px.dtype}")
        object.__setattr__(self, "pixels", _freeze(px))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageFrame):
            return NotImplemented
        return (
            self.source_id == other.source_id
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """A {0, 1} mask, row-major (height, width), paired with some frame."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ShapeError(f"mask values must be (H, W), got {v.shape}")
        if v.dtype != np.uint8:
            v = v.astype(np.uint8)
        if not np.isin(v, (0, 1)).all():
            raise ShapeError("binary mask values must be 0 or 1")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def popcount(self) -> int:
        return int(self.values.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class SoftMask:
    """A real-valued mask with every value in [0, 1], row-major (H, W)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ShapeError(f"mask values must be (H, W), got {v.shape}")
        if v.dtype.kind != "f":
            v = v.astype(np.float32)
        if v.size and (float(v.min()) < 0.0 or float(v.max()) > 1.0):
            raise ShapeError("soft mask values must lie in [0, 1]")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other) -> bool:
        if not isinstance(other, SoftMask):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class PolygonAnnotation:
    """One annotation made of one or more polygon rings.

    Each ring is a sequence of (x, y) vertices in pixel coordinates; rings
    with fewer than 3 vertices are rejected at rasterization time with an
    error naming the source record.
    """

    rings: tuple = field(default=())

    def __post_init__(self):
        norm = tuple(tuple((float(x), float(y)) for x, y in ring) for ring in self.rings)
        object.__setattr__(self, "rings", norm)

    def validate(self, width: int, height: int, source: str = "") -> None:
        """Check the ring-size and vertex-bound invariants for a target image."""
        where = f" in {source!r}" if source else ""
        for i, ring in enumerate(self.rings):
            if len(ring) < 3:
                raise MalformedAnnotationError(
                    f"ring {i}{where} has {len(ring)} vertices; at least 3 required"
                )
            for x, y in ring:
                if not (0.0 <= x <= width and 0.0 <= y <= height):
                    raise MalformedAnnotationError(
                        f"ring {i}{where} has vertex ({x}, {y}) outside "
                        f"[0, {width}] x [0, {height}]"
                    )


def check_same_shape(a, b, what: str = "operands") -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{what} shapes differ: {a.shape} vs {b.shape}")
