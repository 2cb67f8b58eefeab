"""Gesture-guided object segmentor with a scikit-learn style interface.

`HighlightSegmenter.fit` trains an encoder-decoder on (frame, hand mask)
pairs against binary object masks with per-pixel binary cross-entropy;
`predict` returns soft masks at full frame resolution. A fitted estimator
is frozen and safe to share across concurrent predict calls; fitting owns
the model exclusively.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from sklearn.base import BaseEstimator
from torch import nn

from ..core import BinaryMask, ImageFrame, SoftMask
from ..core.resize import resize_frame, resize_mask_nearest, resize_soft_bilinear
from ..errors import ArgumentError, DatasetError, StateError
from ..evalbench.metrics import iou as iou_metric
from ..models import EncoderDecoderNet, check_catalog, default_input_size
from .inputs import prepare_input
from .schedule import HighlighterTrainConfig, lr_at_epoch

INPUT_CHANNELS = 4  # RGB + hand mask


class HighlightSegmenter(BaseEstimator):
    """Maps (RGB frame, hand mask) to a soft mask over the indicated object.

    Parameters mirror HighlighterTrainConfig; `input_size` of None picks the
    backbone's default (desk-scale for tiny-cnn, capture-scale otherwise).
    """

    input_channels = INPUT_CHANNELS

    def __init__(
        self,
        backbone: str = "efficientnet-b0",
        decoder: str = "unet",
        epochs: int = 100,
        batch_size: int = 4,
        lr_initial: float = 1e-4,
        lr_final: float = 1e-5,
        lr_hold_head: int = 25,
        lr_hold_tail: int = 25,
        input_size: tuple[int, int] | None = None,
        pretrained: bool = False,
        seed: int = 0,
        device: str = "cpu",
    ):
        self.backbone = backbone
        self.decoder = decoder
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr_initial = lr_initial
        self.lr_final = lr_final
        self.lr_hold_head = lr_hold_head
        self.lr_hold_tail = lr_hold_tail
        self.input_size = input_size
        self.pretrained = pretrained
        self.seed = seed
        self.device = device

    # ------------------------------------------------------------------
    def _train_config(self) -> HighlighterTrainConfig:
        return HighlighterTrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr_initial=self.lr_initial,
            lr_final=self.lr_final,
            lr_hold_head=self.lr_hold_head,
            lr_hold_tail=self.lr_hold_tail,
            seed=self.seed,
        )

    def _net_input_size(self) -> tuple[int, int]:
        if self.input_size is not None:
            return tuple(self.input_size)
        return default_input_size(self.backbone)

    def _pack(self, frame: ImageFrame, hand: BinaryMask) -> np.ndarray:
        size = self._net_input_size()
        return prepare_input(resize_frame(frame, size), resize_mask_nearest(hand, size))

    def fit(self, X, y):
        """Train on pairs X = [(frame, hand_mask), ...] against masks y."""
        check_catalog(self.backbone, self.decoder)
        config = self._train_config()
        if not X:
            raise DatasetError("training split is empty")
        if len(X) != len(y):
            raise ArgumentError(f"{len(X)} inputs vs {len(y)} target masks")
        size = self._net_input_size()

        inputs = np.stack([self._pack(frame, hand) for frame, hand in X])
        targets = np.stack(
            [resize_mask_nearest(m, size).values.astype(np.float32) for m in y]
        )[:, None]

        torch.manual_seed(config.seed)
        device = torch.device(self.device)
        net = EncoderDecoderNet(
            self.backbone, self.decoder, INPUT_CHANNELS, pretrained=self.pretrained
        ).to(device)
        xs = torch.from_numpy(inputs).to(device)
        ys = torch.from_numpy(targets).to(device)

        opt = torch.optim.Adam(net.parameters(), lr=config.lr_initial)
        loss_fn = nn.BCEWithLogitsLoss()
        rng = np.random.default_rng(config.seed)
        n = len(X)
        self.loss_history_ = []
        net.train()
        for epoch in range(config.epochs):
            lr = lr_at_epoch(config, epoch)
            for group in opt.param_groups:
                group["lr"] = lr
            order = rng.permutation(n)
            for start in range(0, n, config.batch_size):
                idx = order[start : start + config.batch_size]
                opt.zero_grad()
                loss = loss_fn(net(xs[idx]), ys[idx])
                loss.backward()
                opt.step()
                self.loss_history_.append(float(loss.detach()))

        net.eval()
        self.net_ = net
        self.fitted_input_size_ = size
        self.trained_miou_ = None
        return self

    # ------------------------------------------------------------------
    def _require_fitted(self) -> None:
        if not hasattr(self, "net_"):
            raise StateError("HighlightSegmenter is not fitted/loaded")

    @torch.no_grad()
    def predict_one(self, frame: ImageFrame, hand: BinaryMask) -> SoftMask:
        """Soft object mask at full frame resolution."""
        self._require_fitted()
        x = torch.from_numpy(self._pack(frame, hand)[None])
        probs = torch.sigmoid(self.net_(x.to(self.device)))[0, 0].cpu().numpy()
        soft = SoftMask(np.clip(probs, 0.0, 1.0))
        return resize_soft_bilinear(soft, frame.shape)

    def predict(self, X) -> list[SoftMask]:
        return [self.predict_one(frame, hand) for frame, hand in X]

    def score(self, X, y, threshold: float = 0.5) -> float:
        """Mean IoU of thresholded predictions against ground-truth masks."""
        from ..core import binarize

        preds = self.predict(X)
        values = [iou_metric(binarize(p, threshold), gt) for p, gt in zip(preds, y)]
        return float(np.mean(values))

    # ------------------------------------------------------------------
    def save(self, out_dir: str | Path) -> Path:
        self._require_fitted()
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        torch.save(
            {
                "state_dict": self.net_.state_dict(),
                "params": self.get_params(),
                "fitted_input_size": list(self.fitted_input_size_),
                "trained_miou": self.trained_miou_,
            },
            out / "model.bin",
        )
        return out / "model.bin"

    @classmethod
    def load(cls, model_dir: str | Path, device: str = "cpu") -> "HighlightSegmenter":
        path = Path(model_dir)
        if path.is_dir():
            path = path / "model.bin"
        if not path.exists():
            raise StateError(f"no highlighter model at {path}")
        blob = torch.load(path, map_location="cpu", weights_only=False)
        est = cls(**blob["params"])
        est.device = device
        net = EncoderDecoderNet(est.backbone, est.decoder, INPUT_CHANNELS)
        net.load_state_dict(blob["state_dict"])
        net.eval()
        est.net_ = net.to(device)
        est.fitted_input_size_ = tuple(blob["fitted_input_size"])
        est.trained_miou_ = blob.get("trained_miou")
        est.loss_history_ = []
        return est


def predict_highlight(
    model: HighlightSegmenter, frame: ImageFrame, hand: BinaryMask
) -> SoftMask:
    """Soft object highlight for one frame; model must be fitted or loaded."""
    return model.predict_one(frame, hand)
