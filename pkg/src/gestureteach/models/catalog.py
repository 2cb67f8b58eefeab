"""Registry of backbones and decoders plus network assembly."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import torch
from torch import nn

from ..errors import ConfigError
from .backbones import EfficientNetEncoder, TinyCnnEncoder
from .decoders import DeepLabV3Head, DeepLabV3PlusHead, UNetDecoder, UNetPPDecoder


@dataclass(frozen=True)
class BackboneSpec:
    factory: Callable[..., nn.Module]
    default_input_size: tuple[int, int]  # (height, width)


BACKBONES: dict[str, BackboneSpec] = {
    "tiny-cnn": BackboneSpec(
        factory=lambda in_channels, pretrained=False: TinyCnnEncoder(in_channels),
        default_input_size=(64, 64),
    ),
    "efficientnet-b0": BackboneSpec(
        factory=lambda in_channels, pretrained=False: EfficientNetEncoder(
            "b0", in_channels=in_channels, pretrained=pretrained
        ),
        default_input_size=(480, 640),
    ),
    "efficientnet-b3": BackboneSpec(
        factory=lambda in_channels, pretrained=False: EfficientNetEncoder(
            "b3", in_channels=in_channels, pretrained=pretrained
        ),
        default_input_size=(480, 640),
    ),
}

DECODERS: dict[str, Callable[[list[int]], nn.Module]] = {
    "unet": UNetDecoder,
    "unetpp": UNetPPDecoder,
    "deeplabv3": DeepLabV3Head,
    "deeplabv3plus": DeepLabV3PlusHead,
}


def check_catalog(backbone_id: str, decoder_id: str | None = None) -> None:
    if backbone_id not in BACKBONES:
        raise ConfigError(
            f"unknown backbone {backbone_id!r}; registered: {sorted(BACKBONES)}"
        )
    if decoder_id is not None and decoder_id not in DECODERS:
        raise ConfigError(
            f"unknown decoder {decoder_id!r}; registered: {sorted(DECODERS)}"
        )


def default_input_size(backbone_id: str) -> tuple[int, int]:
    check_catalog(backbone_id)
    return BACKBONES[backbone_id].default_input_size


class EncoderDecoderNet(nn.Module):
    """Encoder + segmentation decoder producing single-channel logits."""

    def __init__(
        self,
        backbone_id: str,
        decoder_id: str,
        in_channels: int = 4,
        pretrained: bool = False,
    ):
        super().__init__()
        check_catalog(backbone_id, decoder_id)
        self.backbone_id = backbone_id
        self.decoder_id = decoder_id
        self.in_channels = in_channels
        self.encoder = BACKBONES[backbone_id].factory(
            in_channels=in_channels, pretrained=pretrained
        )
        self.decoder = DECODERS[decoder_id](self.encoder.out_channels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        feats = self.encoder(x)
        return self.decoder(feats, x.shape[-2:])


def parse_model_spec(spec: str) -> tuple[str, str]:
    """Parse "backbone+decoder" (e.g. "efficientnet-b0+unet")."""
    if "+" not in spec:
        raise ConfigError(f"model spec {spec!r} must look like '<backbone>+<decoder>'")
    backbone_id, decoder_id = spec.split("+", 1)
    check_catalog(backbone_id, decoder_id)
    return backbone_id, decoder_id
