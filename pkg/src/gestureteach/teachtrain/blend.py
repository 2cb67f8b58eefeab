"""Saliency blending between the decoder output and the class activation map."""

from __future__ import annotations

from ..core import SoftMask, check_same_shape
from ..errors import ArgumentError


def blend_saliency(model_out: SoftMask, cam: SoftMask, lam_blend: float) -> SoftMask:
    """Pixelwise lam_blend * model_out + (1 - lam_blend) * cam.

    The endpoints reproduce the operands bit-identically: both terms stay on
    the same arithmetic path and the inputs are nonnegative.
    """
    if not 0.0 <= lam_blend <= 1.0:
        raise ArgumentError(f"blend weight must lie in [0, 1], got {lam_blend}")
    check_same_shape(model_out, cam, "model output and CAM")
    return SoftMask(lam_blend * model_out.values + (1.0 - lam_blend) * cam.values)
