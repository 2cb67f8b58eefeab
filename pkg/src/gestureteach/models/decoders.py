"""Segmentation decoder heads over feature pyramids.

Each decoder consumes the encoder's feature list (shallow to deep) and emits
single-channel logits at a caller-provided output size. Implementations
follow the usual shapes of their families: U-Net skip merging, nested
UNet++ columns, and ASPP-based DeepLab heads.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from .backbones import ConvBlock, _gn


def _up_to(x: torch.Tensor, size) -> torch.Tensor:
    return F.interpolate(x, size=size, mode="bilinear", align_corners=False)


def _row_channels(ch: int) -> int:
    return max(16, min(ch, 128))


class UNetDecoder(nn.Module):
    def __init__(self, enc_channels: list[int]):
        super().__init__()
        self.blocks = nn.ModuleList()
        above = enc_channels[-1]
        out_chs = [_row_channels(c) for c in enc_channels[:-1]]
        for skip_ch, out_ch in zip(reversed(enc_channels[:-1]), reversed(out_chs)):
            self.blocks.append(
                nn.Sequential(
                    ConvBlock(above + skip_ch, out_ch), ConvBlock(out_ch, out_ch)
                )
            )
            above = out_ch
        self.refine = ConvBlock(above, above)
        self.head = nn.Conv2d(above, 1, 1)

    def forward(self, feats: list[torch.Tensor], out_size) -> torch.Tensor:
        x = feats[-1]
        for block, skip in zip(self.blocks, reversed(feats[:-1])):
            x = block(torch.cat([_up_to(x, skip.shape[-2:]), skip], dim=1))
        if x.shape[-2:] != tuple(out_size):
            x = _up_to(x, out_size)
        return self.head(self.refine(x))


class UNetPPDecoder(nn.Module):
    """Nested skip columns; output head sits on the densest top-row node."""

    def __init__(self, enc_channels: list[int]):
        super().__init__()
        self.depth = len(enc_channels)
        self.row_ch = [_row_channels(c) for c in enc_channels]
        self.nodes = nn.ModuleDict()
        for j in range(1, self.depth):
            for i in range(self.depth - j):
                in_ch = enc_channels[i] + (j - 1) * self.row_ch[i]
                below = self.row_ch[i + 1] if j > 1 else enc_channels[i + 1]
                self.nodes[f"{i}_{j}"] = nn.Sequential(
                    ConvBlock(in_ch + below, self.row_ch[i]),
                    ConvBlock(self.row_ch[i], self.row_ch[i]),
                )
        top = self.row_ch[0]
        self.refine = ConvBlock(top, top)
        self.head = nn.Conv2d(top, 1, 1)

    def forward(self, feats: list[torch.Tensor], out_size) -> torch.Tensor:
        grid: dict[tuple[int, int], torch.Tensor] = {
            (i, 0): f for i, f in enumerate(feats)
        }
        for j in range(1, self.depth):
            for i in range(self.depth - j):
                row = [grid[(i, k)] for k in range(j)]
                below = _up_to(grid[(i + 1, j - 1)], row[0].shape[-2:])
                grid[(i, j)] = self.nodes[f"{i}_{j}"](torch.cat(row + [below], dim=1))
        x = grid[(0, self.depth - 1)]
        if x.shape[-2:] != tuple(out_size):
            x = _up_to(x, out_size)
        return self.head(self.refine(x))


class ASPP(nn.Module):
    def __init__(self, in_ch: int, out_ch: int = 128, rates=(1, 2, 4)):
        super().__init__()
        self.branches = nn.ModuleList(
            [
                nn.Sequential(
                    nn.Conv2d(in_ch, out_ch, 1, bias=False), _gn(out_ch), nn.ReLU(inplace=True)
                )
            ]
        )
        for r in rates:
            self.branches.append(
                nn.Sequential(
                    nn.Conv2d(in_ch, out_ch, 3, padding=r, dilation=r, bias=False),
                    _gn(out_ch),
                    nn.ReLU(inplace=True),
                )
            )
        self.pool = nn.Sequential(
            nn.AdaptiveAvgPool2d(1),
            nn.Conv2d(in_ch, out_ch, 1, bias=False),
            nn.ReLU(inplace=True),
        )
        n = len(self.branches) + 1
        self.project = nn.Sequential(
            nn.Conv2d(n * out_ch, out_ch, 1, bias=False), _gn(out_ch), nn.ReLU(inplace=True)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        outs = [b(x) for b in self.branches]
        outs.append(_up_to(self.pool(x), x.shape[-2:]))
        return self.project(torch.cat(outs, dim=1))


class DeepLabV3Head(nn.Module):
    def __init__(self, enc_channels: list[int]):
        super().__init__()
        self.aspp = ASPP(enc_channels[-1])
        self.head = nn.Conv2d(128, 1, 1)

    def forward(self, feats: list[torch.Tensor], out_size) -> torch.Tensor:
        return _up_to(self.head(self.aspp(feats[-1])), out_size)


class DeepLabV3PlusHead(nn.Module):
    """ASPP plus a low-level skip fused at quarter-ish resolution."""

    low_index = 1

    def __init__(self, enc_channels: list[int]):
        super().__init__()
        self.aspp = ASPP(enc_channels[-1])
        low_ch = enc_channels[self.low_index]
        self.low_project = nn.Sequential(
            nn.Conv2d(low_ch, 48, 1, bias=False), _gn(48), nn.ReLU(inplace=True)
        )
        self.fuse = nn.Sequential(ConvBlock(128 + 48, 128), ConvBlock(128, 128))
        self.head = nn.Conv2d(128, 1, 1)

    def forward(self, feats: list[torch.Tensor], out_size) -> torch.Tensor:
        low = self.low_project(feats[self.low_index])
        x = _up_to(self.aspp(feats[-1]), low.shape[-2:])
        x = self.fuse(torch.cat([x, low], dim=1))
        return _up_to(self.head(x), out_size)
