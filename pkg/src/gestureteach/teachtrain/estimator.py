"""The user-taught model: joint classifier + segmentor with CAM saliency.

`TaughtClassifier` follows the scikit-learn estimator conventions. The
classification head is global average pooling plus a single linear layer
over the final encoder features, which is what makes CAM available; the
optional segmentation decoder taps the same feature pyramid. Without the
decoder the model degrades to a plain classifier whose saliency comes
purely from CAM.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import torch
from scipy.special import softmax as np_softmax
from sklearn.base import BaseEstimator, ClassifierMixin
from torch import nn

from ..core import BinaryMask, ImageFrame, SoftMask
from ..core.resize import resize_frame, resize_mask_nearest, resize_soft_bilinear
from ..errors import (
    ArgumentError,
    CapabilityError,
    ConfigError,
    DatasetError,
    RecordValidationError,
    StateError,
)
from ..models import BACKBONES, check_catalog, default_input_size, global_average_pool
from ..models.decoders import UNetDecoder
from .blend import blend_saliency
from .cam import cam_from_features, normalize_minmax, upsample_to
from .classes import ClassDef, check_class_list
from .losses import JointCriterion

DEFAULT_LAMBDA_BLEND = 0.718  # accuracy of the reference highlighter


@dataclass(frozen=True)
class UserTrainConfig:
    epochs: int = 50
    batch_size: int = 4
    lr: float = 1e-4
    optimizer: str = "adam"
    pretrained_encoder: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ConfigError("epochs and batch_size must be positive")
        if self.optimizer != "adam":
            raise ConfigError(f"unsupported optimizer {self.optimizer!r}")


@dataclass(frozen=True, eq=False)
class PredictionResult:
    confidences: np.ndarray
    predicted_class: int
    saliency: SoftMask
    cam: SoftMask
    seg_output: SoftMask | None = None

    def __post_init__(self):
        conf = np.asarray(self.confidences, dtype=np.float64)
        if conf.ndim != 1:
            raise ArgumentError("confidences must be a vector")
        if (conf < -1e-9).any() or (conf > 1 + 1e-9).any():
            raise ArgumentError("confidences must lie in [0, 1]")
        if abs(float(conf.sum()) - 1.0) > 1e-6:
            raise ArgumentError(f"confidences sum to {conf.sum()}, expected 1")
        if int(np.argmax(conf)) != self.predicted_class:
            raise ArgumentError("predicted_class must be the argmax of confidences")
        object.__setattr__(self, "confidences", conf)


class UserNet(nn.Module):
    """Encoder + GAP/linear classification head + optional U-Net decoder."""

    def __init__(
        self,
        encoder_id: str,
        n_classes: int,
        with_decoder: bool,
        pretrained: bool = False,
    ):
        super().__init__()
        check_catalog(encoder_id)
        self.encoder_id = encoder_id
        self.encoder = BACKBONES[encoder_id].factory(
            in_channels=3, pretrained=pretrained
        )
        self.classifier = nn.Linear(self.encoder.out_channels[-1], n_classes)
        self.decoder = UNetDecoder(self.encoder.out_channels) if with_decoder else None

    def forward(self, x: torch.Tensor):
        feats = self.encoder(x)
        final = feats[-1]
        cls_logits = self.classifier(global_average_pool(final))
        seg_logits = self.decoder(feats, x.shape[-2:]) if self.decoder is not None else None
        return cls_logits, seg_logits, final


class TaughtClassifier(BaseEstimator, ClassifierMixin):
    """Joint classification + segmentation model taught from captured samples."""

    def __init__(
        self,
        encoder: str = "efficientnet-b0",
        with_seg_decoder: bool = True,
        epochs: int = 50,
        batch_size: int = 4,
        lr: float = 1e-4,
        lambda_loss: float = 1.0,
        lambda_blend: float = DEFAULT_LAMBDA_BLEND,
        pretrained_encoder: bool = True,
        input_size: tuple[int, int] | None = None,
        seed: int = 0,
        device: str = "cpu",
    ):
        self.encoder = encoder
        self.with_seg_decoder = with_seg_decoder
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.lambda_loss = lambda_loss
        self.lambda_blend = lambda_blend
        self.pretrained_encoder = pretrained_encoder
        self.input_size = input_size
        self.seed = seed
        self.device = device

    # ------------------------------------------------------------------
    @property
    def has_seg_decoder(self) -> bool:
        return bool(self.with_seg_decoder)

    def _net_input_size(self) -> tuple[int, int]:
        if self.input_size is not None:
            return tuple(self.input_size)
        return default_input_size(self.encoder)

    def _train_config(self) -> UserTrainConfig:
        return UserTrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            pretrained_encoder=self.pretrained_encoder,
            seed=self.seed,
        )

    def _frame_tensor(self, frame: ImageFrame) -> np.ndarray:
        size = self._net_input_size()
        rgb = resize_frame(frame, size).pixels.astype(np.float32) / 255.0
        return rgb.transpose(2, 0, 1)

    @staticmethod
    def _unpack(X, y, masks):
        from ..datamgmt.session_store import TeachingSample

        if X and isinstance(X[0], TeachingSample):
            frames = [s.frame for s in X]
            labels = [s.class_id for s in X]
            mask_list = [s.highlight_bin for s in X]
            ids = [s.sample_id for s in X]
            return frames, labels, mask_list, ids
        if y is None:
            raise ArgumentError("y class labels are required unless X is TeachingSamples")
        mask_list = list(masks) if masks is not None else [None] * len(X)
        ids = [getattr(f, "source_id", "") or f"sample-{i}" for i, f in enumerate(X)]
        return list(X), list(y), mask_list, ids

    def fit(self, X, y=None, masks=None, class_labels=None, epoch_callback=None):
        """Fine-tune on frames + class ids (+ object masks when joint)."""
        config = self._train_config()
        frames, labels, mask_list, ids = self._unpack(X, y, masks)
        if not frames:
            raise DatasetError("no training samples")

        unique = sorted(set(int(v) for v in labels))
        if len(unique) < 2:
            raise DatasetError(f"need >= 2 distinct classes, got {unique}")
        if unique != list(range(len(unique))):
            raise DatasetError(f"class ids must be contiguous from 0, got {unique}")

        train_seg = self.with_seg_decoder and self.lambda_loss > 0
        if train_seg:
            for sid, m in zip(ids, mask_list):
                if m is None:
                    raise RecordValidationError(
                        f"sample {sid!r} is missing its object mask "
                        "(required when lambda > 0 and the decoder is enabled)"
                    )

        if class_labels is not None:
            defs = [ClassDef(i, lab) for i, lab in enumerate(class_labels)]
        else:
            defs = [ClassDef(i, f"class_{i}") for i in unique]
        if len(defs) != len(unique):
            raise DatasetError(
                f"{len(defs)} class labels given for {len(unique)} observed classes"
            )
        check_class_list(defs)

        size = self._net_input_size()
        xs = torch.from_numpy(np.stack([self._frame_tensor(f) for f in frames]))
        ys = torch.from_numpy(np.asarray(labels, dtype=np.int64))
        seg_ts = None
        if train_seg:
            seg_ts = torch.from_numpy(
                np.stack(
                    [resize_mask_nearest(m, size).values.astype(np.float32) for m in mask_list]
                )[:, None]
            )

        torch.manual_seed(config.seed)
        device = torch.device(self.device)
        net = UserNet(
            self.encoder,
            n_classes=len(defs),
            with_decoder=self.with_seg_decoder,
            pretrained=config.pretrained_encoder and self.encoder.startswith("efficientnet"),
        ).to(device)
        xs, ys = xs.to(device), ys.to(device)
        if seg_ts is not None:
            seg_ts = seg_ts.to(device)

        opt = torch.optim.Adam(net.parameters(), lr=config.lr)
        criterion = JointCriterion(self.lambda_loss)
        rng = np.random.default_rng(config.seed)
        n = len(frames)
        self.loss_history_ = []
        net.train()
        for epoch in range(config.epochs):
            order = rng.permutation(n)
            for start in range(0, n, config.batch_size):
                idx = order[start : start + config.batch_size]
                opt.zero_grad()
                cls_logits, seg_logits, _ = net(xs[idx])
                loss = criterion(
                    cls_logits,
                    ys[idx],
                    seg_logits if train_seg else None,
                    seg_ts[idx] if train_seg else None,
                )
                loss.backward()
                opt.step()
                self.loss_history_.append(float(loss.detach()))
            if epoch_callback is not None:
                epoch_callback(epoch)

        net.eval()
        self.net_ = net
        self.class_defs_ = defs
        self.classes_ = np.asarray([d.class_id for d in defs])
        self.fitted_input_size_ = size
        return self

    # ------------------------------------------------------------------
    def _require_fitted(self) -> None:
        if not hasattr(self, "net_"):
            raise StateError("TaughtClassifier is not fitted/loaded")

    @torch.no_grad()
    def _forward_frame(self, frame: ImageFrame):
        x = torch.from_numpy(self._frame_tensor(frame)[None]).to(self.device)
        return self.net_(x)

    def predict_proba(self, X) -> np.ndarray:
        self._require_fitted()
        rows = []
        for frame in X:
            cls_logits, _, _ = self._forward_frame(frame)
            rows.append(np_softmax(cls_logits[0].cpu().numpy().astype(np.float64)))
        return np.stack(rows)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    @torch.no_grad()
    def cam_grid(self, frame: ImageFrame, class_id: int) -> np.ndarray:
        """Normalized CAM at feature-map resolution (the pre-upsample map)."""
        self._require_fitted()
        if not hasattr(self.net_, "classifier") or not isinstance(
            self.net_.classifier, nn.Linear
        ):
            raise CapabilityError("model has no CAM-compatible linear head")
        if not 0 <= class_id < len(self.class_defs_):
            raise ArgumentError(f"class_id {class_id} outside [0, {len(self.class_defs_)})")
        _, _, final = self._forward_frame(frame)
        w = self.net_.classifier.weight[class_id]
        raw = torch.tensordot(w, final[0], dims=1).cpu().numpy()
        return normalize_minmax(raw)

    def compute_cam(self, frame: ImageFrame, class_id: int) -> SoftMask:
        return upsample_to(self.cam_grid(frame, class_id), frame.shape)

    @torch.no_grad()
    def predict_result(
        self, frame: ImageFrame, lambda_blend: float | None = None
    ) -> PredictionResult:
        """Confidences, segmentation, CAM and blended saliency for one frame."""
        self._require_fitted()
        lam = self.lambda_blend if lambda_blend is None else lambda_blend
        cls_logits, seg_logits, final = self._forward_frame(frame)
        conf = np_softmax(cls_logits[0].cpu().numpy().astype(np.float64))
        predicted = int(np.argmax(conf))

        w = self.net_.classifier.weight[predicted]
        raw = torch.tensordot(w, final[0], dims=1).cpu().numpy()
        cam = upsample_to(normalize_minmax(raw), frame.shape)

        seg_out = None
        if seg_logits is not None:
            probs = torch.sigmoid(seg_logits)[0, 0].cpu().numpy()
            seg_out = resize_soft_bilinear(
                SoftMask(np.clip(probs, 0.0, 1.0)), frame.shape
            )
            saliency = blend_saliency(seg_out, cam, lam)
        else:
            saliency = cam
        return PredictionResult(
            confidences=conf,
            predicted_class=predicted,
            saliency=saliency,
            cam=cam,
            seg_output=seg_out,
        )

    # ------------------------------------------------------------------
    def save(self, out_dir: str | Path, metrics: dict | None = None) -> Path:
        self._require_fitted()
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        torch.save(
            {
                "state_dict": self.net_.state_dict(),
                "params": self.get_params(),
                "n_classes": len(self.class_defs_),
                "fitted_input_size": list(self.fitted_input_size_),
            },
            out / "weights.bin",
        )
        (out / "classes.json").write_text(
            json.dumps([d.label for d in self.class_defs_], indent=2)
        )
        (out / "train_config.json").write_text(
            json.dumps(
                {
                    **{k: v for k, v in self.get_params().items() if k != "input_size"},
                    "input_size": list(self._net_input_size()),
                    "saved_at": datetime.now(timezone.utc).isoformat(),
                },
                indent=2,
            )
        )
        (out / "metrics.json").write_text(json.dumps(metrics or {}, indent=2))
        return out

    @classmethod
    def load(cls, model_dir: str | Path, device: str = "cpu") -> "TaughtClassifier":
        out = Path(model_dir)
        weights = out / "weights.bin"
        if not weights.exists():
            raise StateError(f"no user model at {weights}")
        blob = torch.load(weights, map_location="cpu", weights_only=False)
        est = cls(**blob["params"])
        est.device = device
        labels = json.loads((out / "classes.json").read_text())
        net = UserNet(
            est.encoder,
            n_classes=blob["n_classes"],
            with_decoder=est.with_seg_decoder,
            pretrained=False,
        )
        net.load_state_dict(blob["state_dict"])
        net.eval()
        est.net_ = net.to(device)
        est.class_defs_ = [ClassDef(i, lab) for i, lab in enumerate(labels)]
        est.classes_ = np.asarray([d.class_id for d in est.class_defs_])
        est.fitted_input_size_ = tuple(blob["fitted_input_size"])
        est.loss_history_ = []
        return est


# the spec-facing name for a fitted TaughtClassifier
UserModel = TaughtClassifier


def train_user_model(
    samples,
    config: UserTrainConfig,
    lam: float = 1.0,
    encoder: str = "efficientnet-b0",
    with_seg_decoder: bool = True,
    class_labels: list[str] | None = None,
    lambda_blend: float = DEFAULT_LAMBDA_BLEND,
    input_size: tuple[int, int] | None = None,
    device: str = "cpu",
    epoch_callback=None,
) -> TaughtClassifier:
    """Train the user's model from captured teaching samples."""
    model = TaughtClassifier(
        encoder=encoder,
        with_seg_decoder=with_seg_decoder,
        epochs=config.epochs,
        batch_size=config.batch_size,
        lr=config.lr,
        lambda_loss=lam,
        lambda_blend=lambda_blend,
        pretrained_encoder=config.pretrained_encoder,
        input_size=input_size,
        seed=config.seed,
        device=device,
    )
    return model.fit(samples, class_labels=class_labels, epoch_callback=epoch_callback)


def compute_cam(model: TaughtClassifier, frame: ImageFrame, class_id: int) -> SoftMask:
    """CAM for one frame and class, upsampled to frame resolution."""
    return model.compute_cam(frame, class_id)


def predict(
    model: TaughtClassifier, frame: ImageFrame, lambda_blend: float | None = None
) -> PredictionResult:
    """Full prediction (confidences, segmentation, CAM, blended saliency)."""
    return model.predict_result(frame, lambda_blend=lambda_blend)
