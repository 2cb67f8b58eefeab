from .frames import (
    CANONICAL_HEIGHT,
    CANONICAL_WIDTH,
    BinaryMask,
    ImageFrame,
    PolygonAnnotation,
    SoftMask,
    check_same_shape,
)
from .ops import binarize, overlay_highlight, round_half_up
from .raster import rasterize_polygons

__all__ = [
    "CANONICAL_HEIGHT",
    "CANONICAL_WIDTH",
    "BinaryMask",
    "ImageFrame",
    "PolygonAnnotation",
    "SoftMask",
    "binarize",
    "check_same_shape",
    "overlay_highlight",
    "rasterize_polygons",
    "round_half_up",
]
