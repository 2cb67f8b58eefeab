"""Pluggable hand-segmentation backends.

Three backends are registered:

* ``pretrained-parser`` runs the resnet-18 human parser loaded from a
  checkpoint (``model_path`` required).
* ``oracle`` reads sidecar masks named ``<frame_id>.hand.png`` from a fixture
  directory (``model_path``) so the whole pipeline is testable without any
  pretrained weights.
* ``constant`` labels every pixel background.

A loaded backend is read-only and safe to share across concurrent requests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import BinaryMask, ImageFrame
from ..errors import BackendInitError, ConfigError, InferenceError
from .labelmap import DEFAULT_ARM_LABELS, LIP_LABEL_NAMES, BodyPartLabelMap, extract_hand_mask


@dataclass(frozen=True)
class HandSegmentorConfig:
    backend_id: str = "constant"
    arm_label_names: frozenset[str] = field(default_factory=lambda: DEFAULT_ARM_LABELS)
    model_path: str | None = None

    def __post_init__(self):
        if not self.arm_label_names:
            raise ConfigError("arm_label_names must not be empty")
        if self.backend_id not in BACKENDS:
            raise ConfigError(
                f"unknown handseg backend {self.backend_id!r}; "
                f"registered: {sorted(BACKENDS)}"
            )
        object.__setattr__(self, "arm_label_names", frozenset(self.arm_label_names))


class ConstantBackend:
    """Labels every pixel background; useful as a no-hands stub."""

    label_names = LIP_LABEL_NAMES

    def __init__(self, config: HandSegmentorConfig):
        self.config = config

    def parse(self, frame: ImageFrame) -> BodyPartLabelMap:
        labels = np.zeros(frame.shape, dtype=np.int64)
        return BodyPartLabelMap(labels, self.label_names)


class OracleBackend:
    """Reads ground-truth hand masks from `<frame_id>.hand.png` fixtures."""

    label_names = LIP_LABEL_NAMES

    def __init__(self, config: HandSegmentorConfig):
        if not config.model_path:
            raise BackendInitError("oracle backend requires model_path = fixture directory")
        self.fixture_dir = Path(config.model_path)
        if not self.fixture_dir.is_dir():
            raise BackendInitError(f"oracle fixture directory not found: {self.fixture_dir}")
        # by-name lookup so ids stay an implementation detail of the table
        self._arm_id = next(
            lid for lid, name in self.label_names.items() if name == "left-arm"
        )

    def parse(self, frame: ImageFrame) -> BodyPartLabelMap:
        path = self.fixture_dir / f"{frame.source_id}.hand.png"
        if not path.exists():
            raise InferenceError(
                f"oracle fixture missing: {path}", source_id=frame.source_id
            )
        from ..core.pngio import load_mask_png

        mask = load_mask_png(path)
        if mask.shape != frame.shape:
            raise InferenceError(
                f"fixture {path} shape {mask.shape} != frame shape {frame.shape}",
                source_id=frame.source_id,
            )
        labels = mask.values.astype(np.int64) * self._arm_id
        return BodyPartLabelMap(labels, self.label_names)


class PretrainedParserBackend:
    """resnet-18 LIP parser; resizes to the native resolution and back."""

    label_names = LIP_LABEL_NAMES

    def __init__(self, config: HandSegmentorConfig):
        import torch

        from .parsenet import ParseNet

        if not config.model_path:
            raise BackendInitError("pretrained-parser backend requires model_path")
        path = Path(config.model_path)
        if not path.exists():
            raise BackendInitError(f"parser checkpoint not found: {path}")
        self.net = ParseNet(num_classes=len(self.label_names))
        try:
            state = torch.load(path, map_location="cpu", weights_only=True)
            self.net.load_state_dict(state)
        except Exception as exc:
            raise BackendInitError(f"cannot load parser checkpoint {path}: {exc}") from exc
        self.net.eval()

    def parse(self, frame: ImageFrame) -> BodyPartLabelMap:
        import torch
        import torch.nn.functional as F

        from .parsenet import NATIVE_SIZE

        try:
            with torch.no_grad():
                x = torch.from_numpy(frame.pixels.astype(np.float32) / 255.0)
                x = x.permute(2, 0, 1).unsqueeze(0)
                x = F.interpolate(x, size=NATIVE_SIZE, mode="bilinear", align_corners=False)
                logits = self.net(x)
                labels = logits.argmax(dim=1, keepdim=True).float()
                # nearest-neighbor back to frame size keeps labels discrete
                labels = F.interpolate(labels, size=frame.shape, mode="nearest")
            return BodyPartLabelMap(
                labels[0, 0].long().numpy(), self.label_names
            )
        except InferenceError:
            raise
        except Exception as exc:
            raise InferenceError(
                f"parser inference failed: {exc}", source_id=frame.source_id
            ) from exc


BACKENDS = {
    "constant": ConstantBackend,
    "oracle": OracleBackend,
    "pretrained-parser": PretrainedParserBackend,
}


class HandSegmentor:
    """Facade: parse a frame into body parts and extract the hand mask."""

    def __init__(self, config: HandSegmentorConfig):
        self.config = config
        self.backend = BACKENDS[config.backend_id](config)

    def parse(self, frame: ImageFrame) -> BodyPartLabelMap:
        return self.backend.parse(frame)

    def hand_mask(self, frame: ImageFrame) -> BinaryMask:
        return extract_hand_mask(self.parse(frame), self.config.arm_label_names)


def parse_human(config: HandSegmentorConfig, frame: ImageFrame) -> BodyPartLabelMap:
    """One-shot parse; for repeated calls build a HandSegmentor once."""
    return HandSegmentor(config).parse(frame)
