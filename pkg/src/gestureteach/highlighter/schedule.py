"""Training configuration and learning-rate schedule for the highlighter.

The schedule holds the initial rate for a head of epochs, decays
geometrically (log-linear) over the middle stretch, and holds the final
rate for a tail of epochs. There is no validation set and no early stop;
the final-epoch model is the reported one.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ArgumentError, ConfigError


@dataclass(frozen=True)
class HighlighterTrainConfig:
    epochs: int = 100
    batch_size: int = 4
    lr_initial: float = 1e-4
    lr_final: float = 1e-5
    lr_hold_head: int = 25
    lr_hold_tail: int = 25
    optimizer: str = "adam"
    seed: int = 0

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ConfigError("epochs and batch_size must be positive")
        if self.lr_hold_head + self.lr_hold_tail >= self.epochs:
            raise ConfigError(
                "lr_hold_head + lr_hold_tail must be smaller than epochs"
            )
        if self.lr_final > self.lr_initial:
            raise ConfigError("lr_final must not exceed lr_initial")
        if self.optimizer != "adam":
            raise ConfigError(f"unsupported optimizer {self.optimizer!r}")


def lr_at_epoch(config: HighlighterTrainConfig, epoch: int) -> float:
    """Learning rate for a zero-based epoch index."""
    if not 0 <= epoch < config.epochs:
        raise ArgumentError(f"epoch {epoch} outside [0, {config.epochs})")
    if epoch < config.lr_hold_head:
        return config.lr_initial
    if epoch >= config.epochs - config.lr_hold_tail:
        return config.lr_final
    span = config.epochs - config.lr_hold_head - config.lr_hold_tail
    frac = (epoch - config.lr_hold_head) / span
    return config.lr_initial * (config.lr_final / config.lr_initial) ** frac
