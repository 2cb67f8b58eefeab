"""Dataset-driven highlighter training: records -> hand masks -> model.

Hand masks come from the configured hand-segmentation backend, so the
training pipeline mirrors the serving pipeline end to end.
"""

from __future__ import annotations

import numpy as np

from ..datamgmt.split import DatasetSplit
from ..errors import DatasetError, RecordValidationError
from ..evalbench.metrics import EvalReport
from ..handseg import HandSegmentor, HandSegmentorConfig
from ..models import parse_model_spec
from .estimator import HighlightSegmenter
from .schedule import HighlighterTrainConfig


def _materialize(records, segmentor: HandSegmentor):
    X, y = [], []
    for rec in records:
        frame = rec.load_frame()
        if rec.mask_path is None and rec.polygons is None:
            raise RecordValidationError(
                f"record {rec.source_id!r} has no ground-truth object mask"
            )
        gt = rec.load_object_mask()
        hand = segmentor.hand_mask(frame)
        X.append((frame, hand))
        y.append(gt)
    return X, y


def write_worst_cases(samples, out_dir, k: int = 5) -> list[str]:
    """Save side-by-side images of the lowest-IoU predictions.

    `samples` are (source_id, frame, pred_soft, gt_mask, iou) tuples; each
    output panel shows the raw frame, the prediction overlay, and the
    ground-truth overlay, left to right.
    """
    from pathlib import Path

    from PIL import Image

    from ..core import SoftMask, overlay_highlight

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    ranked = sorted(samples, key=lambda s: s[4])[:k]
    for rank, (source_id, frame, pred, gt, iou_v) in enumerate(ranked):
        pred_panel = overlay_highlight(frame, pred, color=(255, 40, 40), alpha_scale=0.6)
        gt_soft = SoftMask(gt.values.astype(np.float32))
        gt_panel = overlay_highlight(frame, gt_soft, color=(40, 220, 40), alpha_scale=0.6)
        strip = np.concatenate([frame.pixels, pred_panel.pixels, gt_panel.pixels], axis=1)
        name = f"{rank:02d}_iou{iou_v:.3f}_{source_id or 'frame'}.png"
        Image.fromarray(strip, mode="RGB").save(out / name)
        written.append(name)
    return written


def train_highlighter(
    split: DatasetSplit,
    model_spec: str,
    config: HighlighterTrainConfig,
    handseg: HandSegmentorConfig,
    input_size: tuple[int, int] | None = None,
    pretrained: bool = False,
    device: str = "cpu",
) -> tuple[HighlightSegmenter, EvalReport]:
    """Train on the split's train side; report test-side mIoU (final epoch,
    no early stopping)."""
    if not split.train:
        raise DatasetError("training split is empty")
    backbone_id, decoder_id = parse_model_spec(model_spec)

    segmentor = HandSegmentor(handseg)
    train_X, train_y = _materialize(split.train, segmentor)

    model = HighlightSegmenter(
        backbone=backbone_id,
        decoder=decoder_id,
        epochs=config.epochs,
        batch_size=config.batch_size,
        lr_initial=config.lr_initial,
        lr_final=config.lr_final,
        lr_hold_head=config.lr_hold_head,
        lr_hold_tail=config.lr_hold_tail,
        input_size=input_size,
        pretrained=pretrained,
        seed=config.seed,
        device=device,
    )
    model.fit(train_X, train_y)

    desc = f"{model_spec} @ {model._net_input_size()}"
    if split.test:
        test_X, test_y = _materialize(split.test, segmentor)
        from ..core import binarize
        from ..evalbench.metrics import iou

        per_image = [
            iou(binarize(model.predict_one(frame, hand), 0.5), gt)
            for (frame, hand), gt in zip(test_X, test_y)
        ]
        report = EvalReport(
            miou=float(np.mean(per_image)),
            per_image_iou=per_image,
            model_desc=desc,
            dataset_desc=f"test records={len(split.test)} seed={split.seed}",
            seed=config.seed,
        )
    else:
        report = EvalReport(
            miou=0.0,
            per_image_iou=[],
            model_desc=desc,
            dataset_desc="no test records",
            seed=config.seed,
        )
    model.trained_miou_ = report.miou if split.test else None
    return model, report
