"""Feature-pyramid encoders.

Every encoder maps an (N, C, H, W) input to a list of feature maps ordered
shallow to deep, and exposes `out_channels` / `reductions` describing the
pyramid. `tiny-cnn` is a from-scratch encoder small enough to train on CPU
in seconds; the EfficientNet variants wrap torchvision and accept optional
ImageNet-pretrained weights when the environment can provide them.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import BackendInitError

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


def _gn(ch: int) -> nn.GroupNorm:
    return nn.GroupNorm(8 if ch % 8 == 0 else 1, ch)


class ConvBlock(nn.Sequential):
    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__(
            nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False),
            _gn(out_ch),
            nn.ReLU(inplace=True),
        )


class TinyCnnEncoder(nn.Module):
    """Four-level pyramid at strides 1/2/4/8; a few thousand parameters."""

    out_channels = [16, 24, 48, 96]
    reductions = [1, 2, 4, 8]

    def __init__(self, in_channels: int = 3):
        super().__init__()
        self.stem = ConvBlock(in_channels, 16)
        self.stage1 = nn.Sequential(ConvBlock(16, 24, stride=2), ConvBlock(24, 24))
        self.stage2 = nn.Sequential(ConvBlock(24, 48, stride=2), ConvBlock(48, 48))
        self.stage3 = nn.Sequential(ConvBlock(48, 96, stride=2), ConvBlock(96, 96))

    def forward(self, x: torch.Tensor) -> list[torch.Tensor]:
        f0 = self.stem(x)
        f1 = self.stage1(f0)
        f2 = self.stage2(f1)
        f3 = self.stage3(f2)
        return [f0, f1, f2, f3]


class EfficientNetEncoder(nn.Module):
    """torchvision EfficientNet trunk exposed as a five-level pyramid."""

    # indices into .features after which a pyramid level is emitted
    _taps = (1, 2, 3, 5, 7)

    def __init__(
        self,
        variant: str = "b0",
        in_channels: int = 3,
        pretrained: bool = False,
        normalize: bool | None = None,
    ):
        super().__init__()
        from torchvision import models

        factories = {"b0": models.efficientnet_b0, "b3": models.efficientnet_b3}
        if variant not in factories:
            raise BackendInitError(f"unknown efficientnet variant {variant!r}")
        weights = None
        if pretrained:
            enums = {
                "b0": models.EfficientNet_B0_Weights.IMAGENET1K_V1,
                "b3": models.EfficientNet_B3_Weights.IMAGENET1K_V1,
            }
            weights = enums[variant]
        try:
            trunk = factories[variant](weights=weights)
        except Exception as exc:
            raise BackendInitError(
                f"could not build efficientnet-{variant} with pretrained weights "
                f"(network/cache unavailable?): {exc}"
            ) from exc

        if in_channels != 3:
            old = trunk.features[0][0]
            new = nn.Conv2d(
                in_channels,
                old.out_channels,
                kernel_size=old.kernel_size,
                stride=old.stride,
                padding=old.padding,
                bias=False,
            )
            with torch.no_grad():
                new.weight.zero_()
                new.weight[:, :3] = old.weight
            trunk.features[0][0] = new

        self.features = trunk.features[: self._taps[-1] + 1]
        self.reductions = [2, 4, 8, 16, 32]
        self.out_channels = self._probe_channels(in_channels)

        # normalization by pretraining statistics follows the pretraining
        # convention unless overridden
        self.normalize = pretrained if normalize is None else normalize
        mean = torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1)
        std = torch.tensor(IMAGENET_STD).view(1, 3, 1, 1)
        self.register_buffer("rgb_mean", mean)
        self.register_buffer("rgb_std", std)

    def _probe_channels(self, in_channels: int) -> list[int]:
        with torch.no_grad():
            x = torch.zeros(1, in_channels, 64, 64)
            chans = []
            for i, layer in enumerate(self.features):
                x = layer(x)
                if i in self._taps:
                    chans.append(x.shape[1])
        return chans

    def forward(self, x: torch.Tensor) -> list[torch.Tensor]:
        if self.normalize:
            rgb = (x[:, :3] - self.rgb_mean) / self.rgb_std
            x = torch.cat([rgb, x[:, 3:]], dim=1) if x.shape[1] > 3 else rgb
        feats = []
        for i, layer in enumerate(self.features):
            x = layer(x)
            if i in self._taps:
                feats.append(x)
        return feats


def global_average_pool(x: torch.Tensor) -> torch.Tensor:
    return F.adaptive_avg_pool2d(x, 1).flatten(1)
