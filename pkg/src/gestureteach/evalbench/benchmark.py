"""Throughput benchmarking and architecture comparison.

Throughput is end-to-end for the highlight pipeline (hand segmentation ->
input packing -> highlight prediction), measured per frame with batch 1 and
in-memory frames after a warmup, reported as the median per-frame rate.
The benchmark pins torch to a single worker thread to avoid contention
skew; paper-parity numbers are hardware-dependent.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np
import torch

from ..errors import ArgumentError
from ..handseg import HandSegmentor, HandSegmentorConfig


def benchmark_fps(
    model,
    handseg: HandSegmentorConfig,
    frames,
    warmup: int = 5,
) -> float:
    """Median end-to-end frames/second over the post-warmup frames."""
    if len(frames) < warmup + 10:
        raise ArgumentError(
            f"need at least warmup+10 = {warmup + 10} frames, got {len(frames)}"
        )
    segmentor = HandSegmentor(handseg)
    n_threads = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        rates = []
        for i, frame in enumerate(frames):
            t0 = time.perf_counter()
            hand = segmentor.hand_mask(frame)
            model.predict_one(frame, hand)
            dt = time.perf_counter() - t0
            if i >= warmup:
                rates.append(1.0 / dt)
    finally:
        torch.set_num_threads(n_threads)
    return float(np.median(rates))


@dataclass
class ArchComparison:
    """(spec, mIoU, fps) rows sorted by descending mIoU."""

    rows: list[tuple[str, float, float]]
    notes: str = "fps: batch 1, single torch thread, in-memory frames"

    def to_text(self) -> str:
        width = max([len("model")] + [len(r[0]) for r in self.rows])
        lines = [f"{'model'.ljust(width)}  {'mIoU':>6}  {'fps':>7}"]
        for spec, m, f in self.rows:
            lines.append(f"{spec.ljust(width)}  {m:6.3f}  {f:7.1f}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "rows": [
                    {"spec": s, "miou": m, "fps": f} for s, m, f in self.rows
                ],
                "notes": self.notes,
            },
            indent=2,
        )


def compare_architectures(
    split,
    specs: list[str],
    config,
    handseg: HandSegmentorConfig,
    input_size: tuple[int, int] | None = None,
    device: str = "cpu",
    bench_frames: int = 20,
) -> ArchComparison:
    """Train every spec with the identical config/seed and tabulate results."""
    from ..highlighter.pipeline import train_highlighter
    from ..models import parse_model_spec

    for spec in specs:
        parse_model_spec(spec)

    eval_records = split.test if split.test else split.train
    frames = [rec.load_frame() for rec in eval_records]
    while len(frames) < bench_frames:
        frames = frames + frames
    frames = frames[:bench_frames]

    rows = []
    for spec in specs:
        model, report = train_highlighter(
            split, spec, config, handseg, input_size=input_size, device=device
        )
        fps = benchmark_fps(model, handseg, frames, warmup=5)
        rows.append((spec, report.miou, fps))
    rows.sort(key=lambda r: r[1], reverse=True)
    return ArchComparison(rows=rows)
