"""Synthetic desk-scale scenes for tests, demos and smoke training.

Scenes are tiny RGB canvases with geometric "objects" (circle, square,
ring) on a noisy background. Two-object scenes come with a synthetic hand
blob placed next to either object, expressed only through the hand-mask
channel, which is exactly what the gesture-guided segmentor conditions on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..core import BinaryMask, ImageFrame
from ..core.pngio import save_mask_png
from .hutics import GESTURES

BACKGROUND = (104, 112, 96)
CIRCLE_COLOR = (202, 72, 58)
SQUARE_COLOR = (66, 92, 208)
RING_COLOR = (224, 180, 58)

SHAPES = ("circle", "square", "ring")


def _grid(size):
    h, w = size
    return np.mgrid[0:h, 0:w]


def _shape_mask(kind: str, center, radius: float, size) -> np.ndarray:
    cy, cx = center
    yy, xx = _grid(size)
    d2 = (yy - cy) ** 2 + (xx - cx) ** 2
    if kind == "circle":
        return d2 <= radius**2
    if kind == "square":
        return (np.abs(yy - cy) <= radius) & (np.abs(xx - cx) <= radius)
    if kind == "ring":
        return (d2 <= radius**2) & (d2 >= (radius * 0.55) ** 2)
    raise ValueError(f"unknown shape {kind!r}")


def _hand_mask(center, size) -> np.ndarray:
    cy, cx = center
    yy, xx = _grid(size)
    return ((yy - cy) / 4.5) ** 2 + ((xx - cx) / 7.0) ** 2 <= 1.0


def _render(size, rng, shapes) -> np.ndarray:
    h, w = size
    canvas = np.empty((h, w, 3), dtype=np.float64)
    canvas[:] = BACKGROUND
    canvas += rng.normal(0.0, 5.0, size=(h, w, 3))
    for mask, color in shapes:
        canvas[mask] = color
    return np.clip(canvas, 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class TwoObjectScene:
    """A circle and a square with a hand placement next to each."""

    frame: ImageFrame
    circle_mask: BinaryMask
    square_mask: BinaryMask
    hand_at_circle: BinaryMask
    hand_at_square: BinaryMask

    def pick(self, indicate_circle: bool) -> tuple[BinaryMask, BinaryMask]:
        """(hand mask, ground-truth object mask) for the indicated object."""
        if indicate_circle:
            return self.hand_at_circle, self.circle_mask
        return self.hand_at_square, self.square_mask


def two_object_scene(
    rng: np.random.Generator, size: tuple[int, int] = (64, 64), source_id: str = ""
) -> TwoObjectScene:
    h, w = size
    left_x = rng.uniform(0.19 * w, 0.31 * w)
    right_x = rng.uniform(0.66 * w, 0.78 * w)
    if rng.random() < 0.5:
        left_x, right_x = right_x, left_x
    c_center = (rng.uniform(0.25 * h, 0.6 * h), left_x)
    s_center = (rng.uniform(0.25 * h, 0.6 * h), right_x)
    c_rad = rng.uniform(0.11 * h, 0.14 * h)
    s_rad = rng.uniform(0.1 * h, 0.13 * h)

    circle = _shape_mask("circle", c_center, c_rad, size)
    square = _shape_mask("square", s_center, s_rad, size)
    hand_c = _hand_mask((c_center[0] + c_rad + 5.5, c_center[1]), size)
    hand_s = _hand_mask((s_center[0] + s_rad + 5.5, s_center[1]), size)

    pixels = _render(size, rng, [(circle, CIRCLE_COLOR), (square, SQUARE_COLOR)])
    return TwoObjectScene(
        frame=ImageFrame(pixels, source_id=source_id),
        circle_mask=BinaryMask(circle.astype(np.uint8)),
        square_mask=BinaryMask(square.astype(np.uint8)),
        hand_at_circle=BinaryMask(hand_c.astype(np.uint8)),
        hand_at_square=BinaryMask(hand_s.astype(np.uint8)),
    )


def single_object_scene(
    rng: np.random.Generator,
    shape: str,
    size: tuple[int, int] = (64, 64),
    source_id: str = "",
) -> tuple[ImageFrame, BinaryMask]:
    h, w = size
    center = (rng.uniform(0.3 * h, 0.7 * h), rng.uniform(0.3 * w, 0.7 * w))
    radius = rng.uniform(0.14 * h, 0.2 * h)
    colors = {"circle": CIRCLE_COLOR, "square": SQUARE_COLOR, "ring": RING_COLOR}
    mask = _shape_mask(shape, center, radius, size)
    pixels = _render(size, rng, [(mask, colors[shape])])
    return ImageFrame(pixels, source_id=source_id), BinaryMask(mask.astype(np.uint8))


def make_highlight_dataset(
    n: int = 12, size: tuple[int, int] = (64, 64), seed: int = 0
) -> list[tuple[ImageFrame, BinaryMask, BinaryMask, TwoObjectScene]]:
    """(frame, hand, ground truth, scene) tuples, alternating target object."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        scene = two_object_scene(rng, size=size, source_id=f"synth_{i:03d}")
        hand, gt = scene.pick(indicate_circle=(i % 2 == 0))
        out.append((scene.frame, hand, gt, scene))
    return out


def write_hutics_corpus(
    root: str | Path,
    n_participants: int = 2,
    per_participant: int = 12,
    size: tuple[int, int] = (64, 64),
    seed: int = 0,
    polygon_masks: bool = False,
) -> Path:
    """Write a canonical-layout corpus of two-object scenes.

    Object masks are PNGs (or polygon annotations when `polygon_masks`);
    hand-mask fixtures for the oracle backend land in `hands/`.
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    (root / "hands").mkdir(parents=True, exist_ok=True)
    entries = []
    for p in range(n_participants):
        pid = f"p{p:02d}"
        (root / "images" / pid).mkdir(parents=True, exist_ok=True)
        (root / "masks" / pid).mkdir(parents=True, exist_ok=True)
        for k in range(per_participant):
            gesture = GESTURES[k % len(GESTURES)]
            stem = f"{gesture}_{k}"
            scene = two_object_scene(rng, size=size, source_id=f"{pid}_{stem}")
            hand, gt = scene.pick(indicate_circle=(k % 2 == 0))

            image_rel = f"images/{pid}/{stem}.jpg"
            Image.fromarray(scene.frame.pixels, mode="RGB").save(
                root / image_rel, format="JPEG", quality=92
            )
            if polygon_masks:
                ys, xs = np.nonzero(gt.values)
                x0, x1 = float(xs.min()), float(xs.max() + 1)
                y0, y1 = float(ys.min()), float(ys.max() + 1)
                mask_entry = {"polygons": [[[x0, y0], [x1, y0], [x1, y1], [x0, y1]]]}
            else:
                mask_rel = f"masks/{pid}/{stem}.png"
                save_mask_png(gt, root / mask_rel)
                mask_entry = mask_rel
            save_mask_png(hand, root / "hands" / f"{pid}_{stem}.hand.png")
            entries.append(
                {
                    "image": image_rel,
                    "mask": mask_entry,
                    "participant": pid,
                    "gesture": gesture,
                }
            )
    (root / "metadata.json").write_text(json.dumps(entries, indent=2))
    return root
